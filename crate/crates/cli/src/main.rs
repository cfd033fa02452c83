//! `qghjm` command-line front end.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 when an explosion
//! condition does not hold or a certificate fails verification, 1 for I/O and
//! other runtime failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {path}: {message}")]
    Config { path: String, message: String },

    #[error("{0}")]
    Invalid(qghjm_core::Error),

    #[error("{0}")]
    Unsatisfied(String),

    #[error("{0}")]
    Runtime(qghjm_core::Error),
}

impl From<qghjm_core::Error> for CliError {
    fn from(e: qghjm_core::Error) -> Self {
        use qghjm_core::Error as E;
        match e {
            E::InvalidParam { .. }
            | E::InvalidCurve(_)
            | E::Config { .. }
            | E::Domain(_)
            | E::UnsupportedGamma(_)
            | E::GammaOutOfRange(_) => Self::Invalid(e),
            E::InfeasibleWedge(_) => Self::Unsatisfied(e.to_string()),
            _ => Self::Runtime(e),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config { .. } | Self::Invalid(_) => 2,
            Self::Unsatisfied(_) => 3,
            Self::Runtime(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qghjm",
    version,
    about = "Quasi-Gaussian HJM explosion toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `sim.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "QGHJM_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo paths and explosion times.
    Simulate(Common),
    /// Largest admissible mean reversion per volatility, one CSV per gamma.
    Region(Common),
    /// Explosion condition, Lyapunov certificate and its grid verification.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Multiply C3 of the certificate before verifying (negative control).
        #[arg(long)]
        c3_scale: Option<f64>,
    },
    /// Deterministic limit of the state equations.
    Ode(Common),
    /// Futures and bond diagnostics.
    Price(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, c3_scale) = match &cli.command {
        Command::Simulate(c) | Command::Region(c) | Command::Ode(c) | Command::Price(c) => {
            (c, None)
        }
        Command::Verify { common, c3_scale } => (common, *c3_scale),
    };
    let cfg = RunConfig::load(&common.config, common.seed)?;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config {
                path: "--threads".into(),
                message: "must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(std::io::Error::other(e).into()))?;
    }
    std::fs::create_dir_all(&common.out).map_err(|e| CliError::Runtime(e.into()))?;
    let out = common.out.as_path();
    match cli.command {
        Command::Simulate(_) => commands::simulate(&cfg, out),
        Command::Region(_) => commands::region(&cfg, out),
        Command::Verify { .. } => commands::verify(&cfg, out, c3_scale),
        Command::Ode(_) => commands::ode(&cfg, out),
        Command::Price(_) => commands::price(&cfg, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
