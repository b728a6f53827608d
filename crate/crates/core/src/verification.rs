//! Numerical reproduction of the onset theorem: a `δ`-sized perturbation
//! follows its maximal linear growing modes up to the escape time
//! `T^δ = ln(θ/δ)/λ_max`, with deviation bounded by
//!
//! ```text
//! C (e^{-νt} + δ‖w₀‖²_{H²} + δe^{λ_max t}) δe^{λ_max t}.
//! ```

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::csv;
use crate::kinetics::{Linearization, ReactionSystem};
use crate::linear_analysis::{growing_mode_summary, AnalysisError, GrowingModeSummary, ModeEigen, ModeIndex};
use crate::simulator::{Halt, SimError, SimulationConfig, Simulator};
use crate::spectral::{
    eigen_decompose, linear_propagate, mode_weight, Coefficients, EigenCoordinates, Grid, ModeSpectrum,
    SpectralError, SpectralField, Transform,
};

pub const DEFAULT_THETA: f64 = 0.1;
pub const DEFAULT_EPSILON_FRAC: f64 = 0.25;
pub const DEFAULT_DELTAS: [f64; 3] = [1e-3, 1e-4, 1e-5];
/// Uniform samples of `dev(t)` on `[0, T^δ]`.
pub const DEFAULT_SAMPLES: usize = 200;
/// Allowed spread of per-`δ` maximal ratios.
pub const RATIO_SPREAD_MAX: f64 = 3.0;
/// Relative roundoff allowance in the linear-only deviation check.
pub const LINEAR_FLOOR_REL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;
/// Relative growth of `dev(T^δ)` tolerated by the monotonicity flag.
pub const MONOTONE_SLACK: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum VerificationError {
    #[error("delta = {delta} exceeds theta = {theta}")]
    BadOrder { delta: f64, theta: f64 },
    #[error("lambda_max must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("need at least 3 deltas spanning 2 decades, got {count} spanning {decades:.2}")]
    InsufficientData { count: usize, decades: f64 },
    #[error("g_v = {0} is not negative")]
    NonNegativeGv(f64),
    #[error("initial profile must have unit L2 norm, got {0}")]
    NotNormalized(f64),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

/// `T^δ = ln(θ/δ)/λ_max`.
pub fn escape_time(delta: f64, theta: f64, lambda_max: f64) -> Result<f64, VerificationError> {
    if delta > theta {
        return Err(VerificationError::BadOrder { delta, theta });
    }
    if !(delta > 0.0) {
        return Err(VerificationError::InvalidSpec(format!("delta must be positive, got {delta}")));
    }
    if !(lambda_max > 0.0) {
        return Err(VerificationError::NonPositiveRate(lambda_max));
    }
    Ok((theta / delta).ln() / lambda_max)
}

fn dominant_eigen<'s>(summary: &'s GrowingModeSummary, q: &ModeIndex) -> Option<&'s ModeEigen> {
    summary.scanned.iter().find(|(m, _)| m == q).map(|(_, e)| e)
}

/// Flat positions of the maximal-growth modes on `grid`.
fn dominant_flats(summary: &GrowingModeSummary, grid: Grid) -> Vec<(usize, [f64; 2])> {
    summary
        .omega_max
        .iter()
        .filter(|q| q.dim() == grid.dim() && q.components().iter().all(|&c| c < grid.n()))
        .filter_map(|q| match dominant_eigen(summary, q) {
            Some(ModeEigen::Generic { r_plus, .. }) => Some((grid.ravel(q.components()), *r_plus)),
            _ => None,
        })
        .collect()
}

/// `e^{λ_max t} Σ_{q ∈ Ω_max} w_q⁺ r₊(q) e_q`.
pub fn dominant_mode_prediction(coords: &EigenCoordinates, summary: &GrowingModeSummary, t: f64) -> Coefficients {
    let grid = coords.grid();
    let growth = (summary.lambda_max * t).exp();
    let mut out = Coefficients::zeros(grid);
    for (flat, r_plus) in dominant_flats(summary, grid) {
        let w_plus = coords.pair(flat)[1];
        out.set(flat, [growth * w_plus * r_plus[0], growth * w_plus * r_plus[1]]);
    }
    out
}

/// Unit-L² profile `r₊(q₀) e_{q₀} / (|r₊(q₀)| √μ_{q₀})`.
pub fn pure_mode_profile(
    grid: Grid,
    summary: &GrowingModeSummary,
    q0: &ModeIndex,
) -> Result<SpectralField, VerificationError> {
    let Some(ModeEigen::Generic { r_plus, .. }) = dominant_eigen(summary, q0) else {
        return Err(VerificationError::InvalidSpec(format!("{q0} is not a generic scanned mode")));
    };
    if q0.components().iter().any(|&c| c >= grid.n()) || q0.dim() != grid.dim() {
        return Err(VerificationError::InvalidSpec(format!("{q0} is not resolved on the grid")));
    }
    let norm = (r_plus[0].powi(2) + r_plus[1].powi(2)).sqrt() * mode_weight(q0.components()).sqrt();
    let mut c = Coefficients::zeros(grid);
    c.set_mode(q0.components(), [r_plus[0] / norm, r_plus[1] / norm]);
    Ok(SpectralField::from_coeffs(c, &Transform::new(grid.n())))
}

/// Unit-L² profile built from `r₊(q₀) + m r₋(q₀)` on `q₀` plus a random
/// background of size `background` on every other mode with all `qᵢ ≤ band`.
pub fn mixed_mode_profile(
    grid: Grid,
    summary: &GrowingModeSummary,
    q0: &ModeIndex,
    minus_weight: f64,
    background: f64,
    band: usize,
    seed: u64,
) -> Result<SpectralField, VerificationError> {
    let Some(ModeEigen::Generic { r_plus, r_minus, .. }) = dominant_eigen(summary, q0) else {
        return Err(VerificationError::InvalidSpec(format!("{q0} is not a generic scanned mode")));
    };
    if q0.components().iter().any(|&c| c >= grid.n()) || q0.dim() != grid.dim() {
        return Err(VerificationError::InvalidSpec(format!("{q0} is not resolved on the grid")));
    }
    let mut c = random_coefficients(grid, band, seed).scaled(background);
    c.set_mode(
        q0.components(),
        [r_plus[0] + minus_weight * r_minus[0], r_plus[1] + minus_weight * r_minus[1]],
    );
    normalized(c)
}

/// Unit-L² profile with uniform random coefficients on modes with all `qᵢ ≤ band`.
pub fn random_profile(grid: Grid, band: usize, seed: u64) -> Result<SpectralField, VerificationError> {
    normalized(random_coefficients(grid, band, seed))
}

fn random_coefficients(grid: Grid, band: usize, seed: u64) -> Coefficients {
    let d = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Coefficients::zeros(grid);
    for f in 0..grid.len() {
        if grid.unravel(f)[..d].iter().all(|&q| q <= band) {
            c.set(f, [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
        }
    }
    c
}

/// Rescales coefficients to unit L² norm.
pub fn normalized(coeffs: Coefficients) -> Result<SpectralField, VerificationError> {
    let norm = coeffs.l2_norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(VerificationError::NotNormalized(norm));
    }
    let grid = coeffs.grid();
    Ok(SpectralField::from_coeffs(coeffs.scaled(1.0 / norm), &Transform::new(grid.n())))
}

/// Inputs of one δ-sweep.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub system: ReactionSystem,
    pub lin: Linearization,
    pub w0: SpectralField,
    pub theta: f64,
    pub delta_list: Vec<f64>,
    pub epsilon_frac: f64,
    pub samples: usize,
}

impl ExperimentSpec {
    pub fn new(system: ReactionSystem, lin: Linearization, w0: SpectralField) -> Self {
        Self {
            system,
            lin,
            w0,
            theta: DEFAULT_THETA,
            delta_list: DEFAULT_DELTAS.to_vec(),
            epsilon_frac: DEFAULT_EPSILON_FRAC,
            samples: DEFAULT_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<(), VerificationError> {
        let norm = self.w0.l2_norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(VerificationError::NotNormalized(norm));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(VerificationError::InvalidSpec(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if !(self.epsilon_frac > 0.0 && self.epsilon_frac < 1.0) {
            return Err(VerificationError::InvalidSpec(format!(
                "epsilon_frac must lie in (0, 1), got {}",
                self.epsilon_frac
            )));
        }
        if self.samples == 0 {
            return Err(VerificationError::InvalidSpec("samples must be >= 1".into()));
        }
        if self.delta_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(VerificationError::InvalidSpec("delta_list must be strictly decreasing".into()));
        }
        for &delta in &self.delta_list {
            if delta > self.theta {
                return Err(VerificationError::BadOrder { delta, theta: self.theta });
            }
            if !(delta > 0.0) {
                return Err(VerificationError::InvalidSpec(format!("delta must be positive, got {delta}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationSample {
    pub t: f64,
    pub dev: f64,
    pub bound: f64,
    pub ratio: f64,
    pub l2: f64,
    pub h2: f64,
}

/// Outcome for one `δ`.
#[derive(Debug, Clone)]
pub struct DeltaRun {
    pub delta: f64,
    pub escape_time: f64,
    pub samples: Vec<DeviationSample>,
    /// `‖w^δ(T^δ)‖`, if the run reached `T^δ`.
    pub final_l2: Option<f64>,
    pub halt: Option<Halt>,
    pub error: Option<String>,
}

impl DeltaRun {
    pub fn completed(&self) -> bool {
        self.error.is_none() && self.halt.is_none() && self.final_l2.is_some()
    }

    /// `‖w^δ(T^δ)‖ ≥ θ/2`.
    pub fn escaped(&self, theta: f64) -> bool {
        self.final_l2.is_some_and(|x| x >= 0.5 * theta)
    }

    /// Largest ratio over `[ε T^δ, T^δ]`.
    pub fn max_ratio(&self, epsilon_frac: f64) -> Option<f64> {
        let start = epsilon_frac * self.escape_time;
        self.samples
            .iter()
            .filter(|s| s.t >= start * (1.0 - 1e-12))
            .map(|s| s.ratio)
            .fold(None, |m, r| Some(m.map_or(r, |x: f64| x.max(r))))
    }

    pub fn dev_at_escape(&self) -> Option<f64> {
        if self.completed() {
            self.samples.last().map(|s| s.dev)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeviationReport {
    pub theta: f64,
    pub epsilon_frac: f64,
    pub lambda_max: f64,
    pub nu: f64,
    pub w0_h2: f64,
    pub runs: Vec<DeltaRun>,
}

impl DeviationReport {
    /// Columns `delta,t,dev,bound,ratio,l2,h2`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        csv::write_header(out, &["delta", "t", "dev", "bound", "ratio", "l2", "h2"])?;
        for run in &self.runs {
            for s in &run.samples {
                csv::write_row(
                    out,
                    &[
                        run.delta.into(),
                        s.t.into(),
                        s.dev.into(),
                        s.bound.into(),
                        s.ratio.into(),
                        s.l2.into(),
                        s.h2.into(),
                    ],
                )?;
            }
        }
        Ok(())
    }

    /// Linear-only runs: largest `dev / (C e^{-νt} δe^{λt} + floor)` over
    /// all samples, with `floor = LINEAR_FLOOR_REL · δe^{λt}`. At most one
    /// when the deviation is carried by the decaying transient alone.
    pub fn transient_excess(&self, c_nu: f64) -> f64 {
        self.runs
            .iter()
            .flat_map(|run| {
                run.samples.iter().map(move |s| {
                    let envelope = run.delta * (self.lambda_max * s.t).exp();
                    let allowed = c_nu * (-self.nu * s.t).exp() * envelope + LINEAR_FLOOR_REL * envelope;
                    s.dev / allowed
                })
            })
            .fold(0.0, f64::max)
    }
}

/// `bound(t) = (e^{-νt} + δ‖w₀‖²_{H²} + δe^{λt}) δe^{λt}`.
pub fn deviation_bound(t: f64, delta: f64, lambda_max: f64, nu: f64, w0_h2: f64) -> f64 {
    let envelope = delta * (lambda_max * t).exp();
    ((-nu * t).exp() + delta * w0_h2 * w0_h2 + envelope) * envelope
}

/// Simulates `δ w₀` to `T^δ` for every `δ` in parallel and compares each
/// state with the dominant-mode prediction at `samples + 1` uniform times.
///
/// `sim` supplies grid, scheme, mode and the target step; its `t_end` and
/// stride are overridden per `δ` so the samples land on steps exactly.
pub fn run_theorem_experiment(
    spec: &ExperimentSpec,
    sim: &SimulationConfig,
) -> Result<DeviationReport, VerificationError> {
    spec.validate()?;
    if sim.grid != spec.w0.grid() {
        return Err(SpectralError::GridMismatch.into());
    }
    let summary = growing_mode_summary(&spec.lin, sim.grid.dim())?;
    let spectrum = ModeSpectrum::for_grid(spec.lin, sim.grid)?;
    let coords = eigen_decompose(spec.w0.coeffs(), &spectrum)?;
    let w0_h2 = spec.w0.h2_norm();
    let escape: Vec<f64> = spec
        .delta_list
        .iter()
        .map(|&d| escape_time(d, spec.theta, summary.lambda_max))
        .collect::<Result<_, _>>()?;

    let runs = spec
        .delta_list
        .par_iter()
        .zip(&escape)
        .map(|(&delta, &t_esc)| run_one(spec, sim, &summary, &coords, w0_h2, delta, t_esc))
        .collect();

    Ok(DeviationReport {
        theta: spec.theta,
        epsilon_frac: spec.epsilon_frac,
        lambda_max: summary.lambda_max,
        nu: summary.nu,
        w0_h2,
        runs,
    })
}

fn run_one(
    spec: &ExperimentSpec,
    sim: &SimulationConfig,
    summary: &GrowingModeSummary,
    coords: &EigenCoordinates,
    w0_h2: f64,
    delta: f64,
    t_esc: f64,
) -> DeltaRun {
    let samples = spec.samples;
    let stride = if t_esc > 0.0 {
        ((t_esc / (samples as f64 * sim.dt)) - 1e-9).ceil().max(1.0) as usize
    } else {
        1
    };
    let cfg = SimulationConfig {
        t_end: t_esc,
        dt: if t_esc > 0.0 { t_esc / (samples * stride) as f64 } else { sim.dt },
        snapshot_stride: stride,
        ..sim.clone()
    };
    let mut run = DeltaRun {
        delta,
        escape_time: t_esc,
        samples: Vec::new(),
        final_l2: None,
        halt: None,
        error: None,
    };
    let transform = Transform::new(cfg.grid.n());
    let initial = SpectralField::from_coeffs(spec.w0.coeffs().scaled(delta), &transform);
    let scaled = coords.scaled(delta);
    let traj = match Simulator::new(&spec.system, &spec.lin, &cfg).and_then(|mut s| s.run(&initial)) {
        Ok(traj) => traj,
        Err(e) => {
            log::warn!("[delta={delta:e}] {e}");
            run.error = Some(e.to_string());
            return run;
        }
    };
    for snap in &traj.snapshots {
        let pred = dominant_mode_prediction(&scaled, summary, snap.t);
        let dev = snap.field.coeffs().sub(&pred).expect("same grid").l2_norm();
        let bound = deviation_bound(snap.t, delta, summary.lambda_max, summary.nu, w0_h2);
        run.samples.push(DeviationSample {
            t: snap.t,
            dev,
            bound,
            ratio: dev / bound,
            l2: snap.field.l2_norm(),
            h2: snap.field.h2_norm(),
        });
    }
    run.halt = traj.halt;
    if traj.completed() {
        run.final_l2 = Some(traj.last().field.l2_norm());
    } else if let Some(h) = traj.halt {
        log::warn!("[delta={delta:e}] {h}");
    }
    log::info!(
        "[delta={delta:e}] T = {t_esc:.4}, {} samples, final L2 = {:?}",
        run.samples.len(),
        run.final_l2
    );
    run
}

/// `sup_t ‖e^{Lt}(w₀ - P w₀)‖ / e^{(λ_max - ν)t}` over `times`, where
/// `P w₀` is the dominant part kept by the prediction.
pub fn transient_constant(
    w0: &Coefficients,
    lin: &Linearization,
    summary: &GrowingModeSummary,
    times: &[f64],
) -> Result<f64, VerificationError> {
    let spectrum = ModeSpectrum::for_grid(*lin, w0.grid())?;
    let coords = eigen_decompose(w0, &spectrum)?;
    let mut best = 0.0f64;
    for &t in times {
        let full = linear_propagate(&coords, &spectrum, t);
        let pred = dominant_mode_prediction(&coords, summary, t);
        let rest = full.sub(&pred)?.l2_norm();
        best = best.max(rest / ((summary.lambda_max - summary.nu) * t).exp());
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    /// Largest ratio over all `δ` and windows.
    pub c_fit: f64,
    /// `(δ, max ratio on [εT^δ, T^δ])` for completed runs.
    pub per_delta: Vec<(f64, f64)>,
    /// Largest over smallest per-`δ` maximum.
    pub spread: f64,
    /// `(δ, dev(T^δ), δ^{ν/λ_max} + θ²)`.
    pub escape_deviation: Vec<(f64, f64, f64)>,
    /// `dev(T^δ)` grows by at most `MONOTONE_SLACK` relative as `δ` decreases.
    pub monotone: bool,
    pub bounded: bool,
    pub stable: bool,
}

impl ScalingStudy {
    pub fn pass(&self) -> bool {
        self.bounded && self.stable
    }
}

pub fn scaling_study(report: &DeviationReport) -> Result<ScalingStudy, VerificationError> {
    let done: Vec<&DeltaRun> = report.runs.iter().filter(|r| r.completed()).collect();
    let (hi, lo) = done
        .iter()
        .fold((0.0f64, f64::INFINITY), |(h, l), r| (h.max(r.delta), l.min(r.delta)));
    let decades = if done.is_empty() { 0.0 } else { (hi / lo).log10() };
    if done.len() < 3 || decades < 2.0 - 1e-9 {
        return Err(VerificationError::InsufficientData {
            count: done.len(),
            decades,
        });
    }
    let per_delta: Vec<(f64, f64)> = done
        .iter()
        .filter_map(|r| r.max_ratio(report.epsilon_frac).map(|m| (r.delta, m)))
        .collect();
    let c_fit = per_delta.iter().map(|p| p.1).fold(0.0, f64::max);
    let smallest = per_delta.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let spread = c_fit / smallest;
    let exponent = report.nu / report.lambda_max;
    let mut escape_deviation: Vec<(f64, f64, f64)> = done
        .iter()
        .filter_map(|r| {
            r.dev_at_escape()
                .map(|dev| (r.delta, dev, r.delta.powf(exponent) + report.theta * report.theta))
        })
        .collect();
    escape_deviation.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = escape_deviation.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + MONOTONE_SLACK));
    Ok(ScalingStudy {
        c_fit,
        per_delta,
        spread,
        escape_deviation,
        monotone,
        bounded: c_fit.is_finite(),
        stable: spread.is_finite() && spread <= RATIO_SPREAD_MAX,
    })
}

/// `C₂ = ((f̄_v + ḡ_u)²/(2|ḡ_v|) + f̄_u)³ / D̄₁²`.
pub fn bootstrap_constant_c2(lin: &Linearization) -> Result<f64, VerificationError> {
    if lin.a22 >= 0.0 {
        return Err(VerificationError::NonNegativeGv(lin.a22));
    }
    let s = lin.a12 + lin.a21;
    let inner = s * s / (2.0 * lin.a22.abs()) + lin.a11;
    Ok(inner.powi(3) / (lin.d1bar * lin.d1bar))
}

/// Settings of the random growth-bound fit.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub trials: usize,
    /// Random data uses modes with every `qᵢ ≤ band`.
    pub band: usize,
    pub times: Vec<f64>,
    pub seed: u64,
}

impl GrowthFit {
    /// `t ∈ {0, 0.1, …, 30}`, band 4.
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            band: 4,
            times: (0..=300).map(|i| 0.1 * i as f64).collect(),
            seed,
        }
    }
}

/// `max ‖e^{Lt} w₀‖ / e^{λ_max t}` over random unit `w₀` and the time grid.
pub fn growth_bound_fit(lin: &Linearization, d: usize, fit: &GrowthFit) -> Result<f64, VerificationError> {
    let summary = growing_mode_summary(lin, d)?;
    let grid = Grid::new(d, (fit.band + 1).next_power_of_two().max(4))?;
    let modes: Vec<usize> = (0..grid.len())
        .filter(|&f| grid.unravel(f)[..d].iter().all(|&q| q <= fit.band))
        .collect();
    let spectrum = ModeSpectrum::new(*lin, grid.max_q2())?;
    let mut rng = ChaCha8Rng::seed_from_u64(fit.seed);
    let trials: Vec<Coefficients> = (0..fit.trials)
        .map(|_| {
            let mut c = Coefficients::zeros(grid);
            for &f in &modes {
                c.set(f, [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            }
            let norm = c.l2_norm();
            c.scaled(1.0 / norm)
        })
        .collect();
    Ok(fit
        .times
        .par_iter()
        .map(|&t| growth_ratio_at(&trials, &modes, &spectrum, grid, t, summary.lambda_max))
        .reduce(|| 0.0, f64::max))
}

fn growth_ratio_at(
    trials: &[Coefficients],
    modes: &[usize],
    spectrum: &ModeSpectrum,
    grid: Grid,
    t: f64,
    lambda_max: f64,
) -> f64 {
    let d = grid.dim();
    let props: Vec<([[f64; 2]; 2], f64)> = modes
        .iter()
        .map(|&f| {
            let q = grid.unravel(f);
            (spectrum.propagator(grid.q2(f), t), mode_weight(&q[..d]))
        })
        .collect();
    let damp = (-lambda_max * t).exp();
    trials
        .iter()
        .map(|c| {
            let sq: f64 = modes
                .iter()
                .zip(&props)
                .map(|(&f, (p, mu))| {
                    let [a, b] = c.get(f);
                    let x = p[0][0] * a + p[0][1] * b;
                    let y = p[1][0] * a + p[1][1] * b;
                    mu * (x * x + y * y)
                })
                .sum();
            sq.sqrt() * damp
        })
        .fold(0.0, f64::max)
}

/// Writes a human-readable pass/fail line.
pub fn verdict_line(name: &str, pass: bool, detail: &str) -> String {
    format!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" })
}
