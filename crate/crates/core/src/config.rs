//! Run configuration.
//!
//! One TOML file with a section per stage; every key is optional.
//!
//! ```toml
//! seed = 7
//!
//! [model]
//! name = "cubic"
//! params = { d2 = 20.0 }
//!
//! [analysis]
//! dim = 1
//!
//! [scan.params]
//! d1 = [0.5, 1.0]
//! d2 = [20.0, 40.0]
//!
//! [simulation]
//! n = 64
//! dt = 0.01
//! t_end = 10.0
//!
//! [experiment]
//! theta = 0.1
//! deltas = [1e-3, 1e-4, 1e-5]
//! profile = "mixed"
//!
//! [output]
//! dir = "out"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::kinetics::{builtin, builtin_guess, DerivativeMode, KineticsError, ReactionSystem, DEFAULT_ETA};
use crate::linear_analysis::{AnalysisError, GrowingModeSummary, ModeIndex};
use crate::simulator::{Mode, Scheme, SimulationConfig};
use crate::spectral::{Grid, SpectralError, SpectralField};
use crate::verification::{
    mixed_mode_profile, pure_mode_profile, random_profile, VerificationError, DEFAULT_DELTAS,
    DEFAULT_EPSILON_FRAC, DEFAULT_SAMPLES, DEFAULT_THETA,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("`{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("model: {0}")]
    Kinetics(#[from] KineticsError),
}

impl ConfigError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for every randomized fixture.
    pub seed: u64,
    pub model: ModelSection,
    pub analysis: AnalysisSection,
    pub scan: ScanSection,
    pub simulation: SimulationSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub name: Option<String>,
    pub params: BTreeMap<String, f64>,
    /// Newton starting point; the model's own guess when absent.
    pub guess: Option<[f64; 2]>,
    pub derivative_mode: DerivativeMode,
    /// Validity radius `η` for simulations.
    pub eta: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            name: None,
            params: BTreeMap::new(),
            guess: None,
            derivative_mode: DerivativeMode::default(),
            eta: DEFAULT_ETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Spatial dimension, shared with simulations.
    pub dim: usize,
    /// Upper end of the dispersion curve; twice the scan cutoff when absent.
    pub k_max: Option<f64>,
    pub k_points: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            dim: 1,
            k_max: None,
            k_points: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    /// Values per parameter; points form the Cartesian product in key order.
    pub params: BTreeMap<String, Vec<f64>>,
}

impl ScanSection {
    /// Parameter points of the sweep. No keys, or any empty list, gives none.
    pub fn points(&self) -> Vec<BTreeMap<String, f64>> {
        if self.params.is_empty() {
            return Vec::new();
        }
        self.params.iter().fold(vec![BTreeMap::new()], |acc, (name, values)| {
            acc.iter()
                .flat_map(|base| {
                    values.iter().map(move |&x| {
                        let mut p = base.clone();
                        p.insert(name.clone(), x);
                        p
                    })
                })
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub mode: Mode,
    pub snapshot_stride: usize,
    pub dealias: bool,
    /// Size of the initial perturbation; the shape is the experiment profile.
    pub amplitude: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            n: 64,
            dt: 0.01,
            t_end: 10.0,
            scheme: Scheme::default(),
            mode: Mode::default(),
            snapshot_stride: 100,
            dealias: true,
            amplitude: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Pure,
    #[default]
    Mixed,
    Random,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub theta: f64,
    pub deltas: Vec<f64>,
    pub epsilon_frac: f64,
    pub samples: usize,
    /// Integrator for the sweep; the step is `simulation.dt`.
    pub scheme: Scheme,
    pub profile: ProfileKind,
    /// Dominant mode carrying the profile; the first of `Ω_max` when absent.
    pub q0: Option<Vec<usize>>,
    /// Weight of `r₋(q₀)` in the mixed profile.
    pub minus_weight: f64,
    /// Size of the random background in the mixed profile.
    pub background: f64,
    /// Random content lives on modes with every `qᵢ ≤ band`.
    pub band: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            deltas: DEFAULT_DELTAS.to_vec(),
            epsilon_frac: DEFAULT_EPSILON_FRAC,
            samples: DEFAULT_SAMPLES,
            scheme: Scheme::Etd2,
            profile: ProfileKind::default(),
            q0: None,
            minus_weight: 0.05,
            background: 0.001,
            band: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    /// Parses TOML. Syntax and type errors carry line and column.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Field-level checks that do not need a model.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=3).contains(&self.analysis.dim) {
            return Err(ConfigError::invalid("analysis.dim", "must be 1, 2 or 3"));
        }
        if self.analysis.k_points < 2 {
            return Err(ConfigError::invalid("analysis.k_points", "must be at least 2"));
        }
        if let Some(k) = self.analysis.k_max {
            if !(k > 0.0 && k.is_finite()) {
                return Err(ConfigError::invalid("analysis.k_max", "must be positive"));
            }
        }
        let sim = &self.simulation;
        if sim.n < 4 || !sim.n.is_power_of_two() {
            return Err(ConfigError::invalid("simulation.n", "must be a power of two >= 4"));
        }
        if !(sim.dt > 0.0 && sim.dt.is_finite()) {
            return Err(ConfigError::invalid("simulation.dt", "must be positive"));
        }
        if !(sim.t_end >= 0.0 && sim.t_end.is_finite()) {
            return Err(ConfigError::invalid("simulation.t_end", "must be non-negative"));
        }
        if sim.snapshot_stride == 0 {
            return Err(ConfigError::invalid("simulation.snapshot_stride", "must be at least 1"));
        }
        if !(sim.amplitude.is_finite() && sim.amplitude >= 0.0) {
            return Err(ConfigError::invalid("simulation.amplitude", "must be non-negative"));
        }
        let exp = &self.experiment;
        if !(exp.theta > 0.0 && exp.theta < 1.0) {
            return Err(ConfigError::invalid("experiment.theta", "must lie in (0, 1)"));
        }
        if exp.deltas.iter().any(|&d| !(d > 0.0 && d <= exp.theta)) {
            return Err(ConfigError::invalid("experiment.deltas", "need 0 < delta <= theta"));
        }
        if !(exp.epsilon_frac > 0.0 && exp.epsilon_frac < 1.0) {
            return Err(ConfigError::invalid("experiment.epsilon_frac", "must lie in (0, 1)"));
        }
        if exp.samples == 0 {
            return Err(ConfigError::invalid("experiment.samples", "must be at least 1"));
        }
        if !(self.model.eta > 0.0) {
            return Err(ConfigError::invalid("model.eta", "must be positive"));
        }
        Ok(())
    }

    pub fn model_name(&self) -> Result<&str, ConfigError> {
        self.model
            .name
            .as_deref()
            .ok_or_else(|| ConfigError::invalid("model.name", "missing model name"))
    }

    /// The configured model at its steady state.
    pub fn build_system(&self) -> Result<ReactionSystem, ConfigError> {
        self.build_system_with(&BTreeMap::new())
    }

    /// The configured model with `overrides` applied on top of `model.params`.
    pub fn build_system_with(&self, overrides: &BTreeMap<String, f64>) -> Result<ReactionSystem, ConfigError> {
        let name = self.model_name()?;
        let mut params = self.model.params.clone();
        params.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
        let system = builtin(name, &params)?
            .with_derivative_mode(self.model.derivative_mode)
            .with_eta(self.model.eta);
        let guess = match self.model.guess {
            Some([u, v]) => (u, v),
            None => builtin_guess(name, &params).expect("known model"),
        };
        Ok(system.locate_steady_state(guess)?)
    }

    pub fn grid(&self) -> Result<Grid, SpectralError> {
        Grid::new(self.analysis.dim, self.simulation.n)
    }

    pub fn simulation_config(&self) -> Result<SimulationConfig, SpectralError> {
        let s = &self.simulation;
        Ok(SimulationConfig::new(self.grid()?, s.dt, s.t_end)
            .with_scheme(s.scheme)
            .with_mode(s.mode)
            .with_stride(s.snapshot_stride)
            .with_dealias(s.dealias))
    }

    /// Simulation settings for the theorem sweep.
    pub fn experiment_sim_config(&self) -> Result<SimulationConfig, SpectralError> {
        Ok(self.simulation_config()?.with_scheme(self.experiment.scheme))
    }

    /// The dominant mode carrying experiment profiles.
    pub fn q0(&self, summary: &GrowingModeSummary) -> Result<ModeIndex, ConfigError> {
        match &self.experiment.q0 {
            Some(q) => ModeIndex::new(q.clone()).map_err(|e| ConfigError::invalid("experiment.q0", e.to_string())),
            None => Ok(summary.omega_max[0].clone()),
        }
    }

    /// Unit-L² initial profile of the given kind.
    pub fn profile(
        &self,
        kind: ProfileKind,
        summary: Option<&GrowingModeSummary>,
    ) -> Result<SpectralField, ProfileError> {
        let grid = self.grid()?;
        let exp = &self.experiment;
        if kind == ProfileKind::Random {
            return Ok(random_profile(grid, exp.band, self.seed)?);
        }
        let summary = summary.ok_or(ProfileError::NoGrowingMode)?;
        let q0 = self.q0(summary)?;
        Ok(match kind {
            ProfileKind::Pure => pure_mode_profile(grid, summary, &q0)?,
            _ => mixed_mode_profile(grid, summary, &q0, exp.minus_weight, exp.background, exp.band, self.seed)?,
        })
    }
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("pure and mixed profiles need a Turing-unstable model")]
    NoGrowingMode,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Verification(#[from] VerificationError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.experiment.deltas, vec![1e-3, 1e-4, 1e-5]);
        assert!(matches!(cfg.build_system(), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = RunConfig::from_toml_str("[model]\nname = \"cubic\"\nbogus = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn field_checks_name_the_field() {
        let err = RunConfig::from_toml_str("[simulation]\nn = 48\n").unwrap_err();
        assert!(err.to_string().contains("simulation.n"));
    }

    #[test]
    fn scan_points_are_a_product() {
        let cfg = RunConfig::from_toml_str("[scan.params]\nd1 = [0.5, 1.0]\nd2 = [20.0, 40.0, 60.0]\n").unwrap();
        let pts = cfg.scan.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0]["d1"], 0.5);
        assert_eq!(pts[1]["d2"], 40.0);
        assert!(ScanSection::default().points().is_empty());
    }

    #[test]
    fn builds_the_benchmark() {
        let cfg = RunConfig::from_toml_str("[model]\nname = \"linear\"\n").unwrap();
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.steady_state(), (0.0, 0.0));
    }
}
