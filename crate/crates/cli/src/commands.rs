//! Command drivers. Each writes its files under the output directory and
//! prints a short report on stdout.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use turing_lab::config::{ConfigError, ProfileError, ProfileKind, RunConfig};
use turing_lab::kinetics::{linearize, KineticsError};
use turing_lab::linear_analysis::{dispersion_curve, growing_mode_summary, AnalysisError};
use turing_lab::report::{write_dispersion_csv, write_modes_csv, write_scan_csv, AnalysisReport, ScanRow};
use turing_lab::simulator::{Halt, Mode, SimError, Simulator};
use turing_lab::spectral::{write_snapshot, SpectralError, SpectralField, Transform};
use turing_lab::verification::{
    bootstrap_constant_c2, run_theorem_experiment, scaling_study, transient_constant, verdict_line,
    DeviationReport, ExperimentSpec, VerificationError,
};

/// Stdout output that tolerates a closed pipe.
fn say(args: std::fmt::Arguments<'_>) {
    let _ = std::io::stdout().lock().write_fmt(args);
}

/// Slack on the linear-only transient check.
const TRANSIENT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    AcceptanceFailed,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("model: {0}")]
    Kinetics(#[from] KineticsError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::NonFinite { .. } | SimError::ValidityExceeded { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<VerificationError> for CliError {
    fn from(e: VerificationError) -> Self {
        match e {
            VerificationError::Simulation(s) => s.into(),
            VerificationError::Analysis(a) => a.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::Config(c) => c.into(),
            other => CliError::Config(ConfigError::Invalid {
                field: "experiment.profile".into(),
                reason: other.to_string(),
            }),
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(dir)
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let path = dir.join(name);
    let io_err = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
    body(&mut w).and_then(|()| w.flush()).map_err(io_err)
}

pub fn analyze(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let system = cfg.build_system()?;
    let report = AnalysisReport::new(&system, cfg.analysis.dim)?;
    let dir = out_dir(cfg)?;
    say(format_args!("{report}"));
    write_file(dir, "analysis.txt", |w| write!(w, "{report}"))?;

    let k_max = cfg.analysis.k_max.unwrap_or_else(|| match (&report.summary, &report.turing) {
        (Some(s), _) => 2.0 * s.k_cut as f64,
        (None, Ok(w)) => w.interval.map_or(10.0, |(_, hi)| (2.0 * hi).max(10.0)),
        _ => 10.0,
    });
    let last = (cfg.analysis.k_points - 1) as f64;
    let ks: Vec<f64> = (0..cfg.analysis.k_points).map(|i| k_max * i as f64 / last).collect();
    let rows = dispersion_curve(&report.lin, &ks)?;
    write_file(dir, "dispersion.csv", |w| write_dispersion_csv(w, &rows))?;
    if let Some(summary) = &report.summary {
        write_file(dir, "modes.csv", |w| write_modes_csv(w, summary))?;
    }
    report.turing.map(|_| Outcome::Success).map_err(CliError::from)
}

pub fn scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.model_name()?;
    let names: Vec<String> = cfg.scan.params.keys().cloned().collect();
    let points = cfg.scan.points();
    let rows: Vec<ScanRow> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let values: Vec<f64> = p.values().copied().collect();
            let row = cfg
                .build_system_with(p)
                .map_err(|e| e.to_string())
                .and_then(|sys| AnalysisReport::new(&sys, cfg.analysis.dim).map_err(|e| e.to_string()))
                .map_or_else(|e| ScanRow::failed(values.clone(), e), |r| ScanRow::from_report(values.clone(), &r));
            log::info!("[point {i}] {p:?}: {}", row.status);
            row
        })
        .collect();
    let dir = out_dir(cfg)?;
    write_file(dir, "scan.csv", |w| write_scan_csv(w, &names, &rows))?;
    let unstable = rows.iter().filter(|r| r.turing_unstable == Some(true)).count();
    say(format_args!("scanned {} points, {unstable} Turing-unstable\n", rows.len()));
    Ok(Outcome::Success)
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let system = cfg.build_system()?;
    let lin = linearize(&system)?;
    let summary = growing_mode_summary(&lin, cfg.analysis.dim).ok();
    let profile = cfg.profile(cfg.experiment.profile, summary.as_ref())?;
    let sim_cfg = cfg.simulation_config()?;
    let transform = Transform::new(sim_cfg.grid.n());
    let initial = SpectralField::from_coeffs(profile.coeffs().scaled(cfg.simulation.amplitude), &transform);
    let traj = Simulator::new(&system, &lin, &sim_cfg)?.run(&initial)?;

    let dir = out_dir(cfg)?;
    write_file(dir, "diagnostics.csv", |w| traj.write_diagnostics_csv(w))?;
    for snap in &traj.snapshots {
        let name = format!("snapshot_{:07}.turf", snap.step);
        write_file(dir, &name, |w| {
            write_snapshot(w, snap.field.values(), snap.t).map_err(std::io::Error::other)
        })?;
    }
    let last = traj.last();
    write_file(dir, "final_coefficients.csv", |w| last.field.coeffs().write_csv(w))?;
    for warning in &traj.warnings {
        say(format_args!("warning: {warning}\n"));
    }
    say(format_args!(
        "{} steps of {} to t = {}; {} snapshots; final L2 = {}\n",
        last.step,
        traj.dt,
        last.t,
        traj.snapshots.len(),
        last.field.l2_norm()
    ));
    match traj.halt {
        Some(h) => Err(CliError::Numerical(h.to_string())),
        None => Ok(Outcome::Success),
    }
}

fn first_halt(report: &DeviationReport) -> Option<(f64, Halt)> {
    report.runs.iter().find_map(|r| r.halt.map(|h| (r.delta, h)))
}

fn first_error(report: &DeviationReport) -> Option<(f64, &str)> {
    report.runs.iter().find_map(|r| r.error.as_deref().map(|e| (r.delta, e)))
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let system = cfg.build_system()?;
    let lin = linearize(&system)?;
    let summary = growing_mode_summary(&lin, cfg.analysis.dim)?;
    let sim_cfg = cfg.experiment_sim_config()?;
    let exp = &cfg.experiment;

    let spec_for = |w0: SpectralField| ExperimentSpec {
        theta: exp.theta,
        delta_list: exp.deltas.clone(),
        epsilon_frac: exp.epsilon_frac,
        samples: exp.samples,
        ..ExperimentSpec::new(system.clone(), lin, w0)
    };
    let main_w0 = cfg.profile(exp.profile, Some(&summary))?;
    let pure_w0 = cfg.profile(ProfileKind::Pure, Some(&summary))?;

    let main = run_theorem_experiment(&spec_for(main_w0.clone()), &sim_cfg)?;
    let linear = run_theorem_experiment(&spec_for(main_w0.clone()), &sim_cfg.clone().with_mode(Mode::LinearOnly))?;
    let pure = run_theorem_experiment(&spec_for(pure_w0), &sim_cfg)?;

    let dir = out_dir(cfg)?;
    write_file(dir, "deviation.csv", |w| main.write_csv(w))?;
    write_file(dir, "deviation_linear.csv", |w| linear.write_csv(w))?;
    write_file(dir, "deviation_pure.csv", |w| pure.write_csv(w))?;

    let mut lines = vec![format!(
        "lambda_max = {}, nu = {}, theta = {}, deltas = {:?}",
        main.lambda_max, main.nu, main.theta, exp.deltas
    )];
    let mut all_pass = true;
    let mut verdict = |lines: &mut Vec<String>, name: &str, pass: bool, detail: String| {
        all_pass &= pass;
        lines.push(verdict_line(name, pass, &detail));
    };

    match scaling_study(&main) {
        Ok(study) => {
            let per: Vec<String> = study.per_delta.iter().map(|(d, m)| format!("{d:e}: {m:.6}")).collect();
            verdict(
                &mut lines,
                "deviation scaling",
                study.pass(),
                format!(
                    "C_fit = {:.6}, spread = {:.4} (max {}), per-delta maxima [{}]",
                    study.c_fit,
                    study.spread,
                    turing_lab::verification::RATIO_SPREAD_MAX,
                    per.join(", ")
                ),
            );
            lines.push(format!(
                "dev(T) non-increasing in delta: {}; dev(T) = [{}]",
                study.monotone,
                study
                    .escape_deviation
                    .iter()
                    .map(|(d, dev, env)| format!("{d:e}: {dev:.3e} vs {env:.3e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        Err(e) => verdict(&mut lines, "deviation scaling", false, e.to_string()),
    }

    let times: Vec<f64> = linear.runs.iter().flat_map(|r| r.samples.iter().map(|s| s.t)).collect();
    let c_nu = transient_constant(main_w0.coeffs(), &lin, &summary, &times)?;
    let excess = linear.transient_excess(c_nu);
    let linear_ok = linear.runs.iter().all(|r| r.completed()) && excess <= 1.0 + TRANSIENT_SLACK;
    verdict(
        &mut lines,
        "linear-only collapse",
        linear_ok,
        format!("dev <= C e^(-nu t) delta e^(lambda t) with C = {c_nu:.6}; worst excess {excess:.9}"),
    );

    let finals: Vec<String> = pure
        .runs
        .iter()
        .map(|r| format!("{:e}: {}", r.delta, r.final_l2.map_or("n/a".into(), |x| format!("{x:.6}"))))
        .collect();
    verdict(
        &mut lines,
        "nonlinear instability",
        pure.runs.iter().all(|r| r.escaped(exp.theta)),
        format!("||w(T)|| >= theta/2 = {} for [{}]", 0.5 * exp.theta, finals.join(", ")),
    );
    match bootstrap_constant_c2(&lin) {
        Ok(c2) => lines.push(format!("C2 = {c2}")),
        Err(e) => lines.push(format!("C2 unavailable: {e}")),
    }

    let text = lines.join("\n") + "\n";
    say(format_args!("{text}"));
    write_file(dir, "summary.txt", |w| w.write_all(text.as_bytes()))?;

    for report in [&main, &linear, &pure] {
        if let Some((delta, h)) = first_halt(report) {
            return Err(CliError::Numerical(format!("[delta={delta:e}] {h}")));
        }
        if let Some((delta, e)) = first_error(report) {
            return Err(CliError::Numerical(format!("[delta={delta:e}] {e}")));
        }
    }
    Ok(if all_pass {
        Outcome::Success
    } else {
        Outcome::AcceptanceFailed
    })
}
