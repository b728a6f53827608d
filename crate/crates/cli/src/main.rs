//! `turing-lab`: analyze, scan, simulate and verify reaction-diffusion models.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Outcome};
use turing_lab::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "turing-lab", version, about = "Turing instability analysis and onset experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized fixtures
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Built-in model name
    #[arg(long, global = true, value_name = "NAME")]
    model: Option<String>,
    /// Perturbation size; repeat for a sweep
    #[arg(long, global = true, value_name = "X")]
    delta: Vec<f64>,
    /// Escape threshold
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Grid points per axis
    #[arg(long, global = true, value_name = "N")]
    grid_n: Option<usize>,
    /// Time step
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Final time for `simulate`
    #[arg(long, global = true)]
    t_end: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Rest-state stability, Turing test, dispersion curve
    Analyze,
    /// Tabulate the Turing test over a parameter grid
    Scan,
    /// Integrate the full system from the configured profile
    Simulate,
    /// Run the deviation-scaling experiment and report pass/fail
    Verify,
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(model) = &self.model {
            cfg.model.name = Some(model.clone());
        }
        if !self.delta.is_empty() {
            cfg.experiment.deltas = self.delta.clone();
        }
        if let Some(theta) = self.theta {
            cfg.experiment.theta = theta;
        }
        if let Some(n) = self.grid_n {
            cfg.simulation.n = n;
        }
        if let Some(dt) = self.dt {
            cfg.simulation.dt = dt;
        }
        if let Some(t_end) = self.t_end {
            cfg.simulation.t_end = t_end;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TURING_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("TURING_LAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| {
        let cfg = cli.run_config()?;
        match cli.command {
            Command::Analyze => commands::analyze(&cfg),
            Command::Scan => commands::scan(&cfg),
            Command::Simulate => commands::simulate(&cfg),
            Command::Verify => commands::verify(&cfg),
        }
    });
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::AcceptanceFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
