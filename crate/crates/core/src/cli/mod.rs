//! Configuration files, experiment runners and result files behind the
//! `pme-mixer` binary.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;

use clap::Parser;

pub use config::{
    AnalysisSection, DomainSection, Emit, EnsembleSection, ExperimentConfig, ExperimentKind, FamilyId, InitialSection,
    ModelKind, ModelSection, NoiseSection,
};
pub use experiments::{run_experiment, run_stability_sweep};
pub use output::{FitRecord, Report, Series};

use crate::error::{PmeError, Result};

/// Process exit code for a finished experiment.
pub const EXIT_PASS: i32 = 0;
/// Some verdict failed.
pub const EXIT_FAIL: i32 = 1;
/// The configuration or input could not be used.
pub const EXIT_CONFIG: i32 = 2;
/// Numerical failure beyond what an ensemble tolerates.
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(err: &PmeError) -> i32 {
    match err {
        PmeError::Config(_) | PmeError::Input(_) | PmeError::Io(_) | PmeError::GridMismatch(_) => EXIT_CONFIG,
        PmeError::BlowUp { .. } | PmeError::EnsembleRejected { .. } | PmeError::NonConvergence { .. } => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "pme-mixer", version, about = "Run a porous medium mixing experiment and write its verdicts")]
pub struct Cli {
    #[arg(value_enum)]
    pub experiment: ExperimentKind,
    /// TOML file overriding the experiment defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default `out/<experiment>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Base seed; overrides `solver.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "PME_MIXER_THREADS")]
    pub threads: Option<usize>,
}

impl Cli {
    /// The configuration this invocation describes.
    pub fn load(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_toml(self.experiment, &std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::defaults(self.experiment),
        };
        if let Some(seed) = self.seed {
            config.solver.seed = seed;
        }
        Ok(config)
    }

    pub fn output_dir(&self, config: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(self.experiment.name()))
    }

    pub fn threads(&self) -> usize {
        self.threads.filter(|&t| t > 0).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

/// Runs one invocation, prints a line per verdict and returns the exit code.
pub fn main_with(cli: &Cli) -> i32 {
    let run = || -> Result<Report> {
        let config = cli.load()?;
        let report = run_experiment(&config, cli.threads())?;
        let dir = cli.output_dir(&config);
        report.write(&dir)?;
        println!("{} -> {}", report.experiment.name(), dir.display());
        Ok(report)
    };
    match run() {
        Ok(report) => {
            for c in &report.verdicts {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!("{tag} {} observed={:e} expected={:e}", c.name, c.observed, c.expected);
            }
            if report.passed() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}
