//! `fraclab` — configuration-driven runner for the numerical workbench.
//!
//! Subcommands:
//! * `run --config <path> [--out <dir>]` — execute the configured
//!   verification suites at the configured resolution and its refinement,
//!   writing one JSON report per suite plus a combined CSV.
//! * `certify-kernel --config <path> [--out <dir>]` — size-condition spot
//!   check plus the annulus smoothness table for the configured kernel.
//! * `eval --config <path> --what <operator|norms|maximal> [--out <dir>]` —
//!   sample the operator, scalar norms, or maximal function as CSV.
//!
//! Exit codes: 0 when everything passed, 1 when a suite (or the size
//! condition) failed, 2 on configuration errors and numeric refusals.
//! `FRACLAB_THREADS` (integer >= 1) caps worker threads.

mod config;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{CliError, RunConfig};
use runner::EvalWhat;

#[derive(Parser)]
#[command(
    name = "fraclab",
    version,
    about = "numerical workbench for fractional integral operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured verification suites and write reports.
    Run {
        /// Path to a JSON config with `"schema": 1`.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for reports (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check the kernel size condition and annulus smoothness sequence.
    CertifyKernel {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sample the operator, norms, or maximal function to CSV.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// What to evaluate.
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Operator,
    Norms,
    Maximal,
}

impl From<What> for EvalWhat {
    fn from(w: What) -> EvalWhat {
        match w {
            What::Operator => EvalWhat::Operator,
            What::Norms => EvalWhat::Norms,
            What::Maximal => EvalWhat::Maximal,
        }
    }
}

/// Apply the `FRACLAB_THREADS` cap. The value is validated even in
/// sequential builds so configs behave identically across features.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FRACLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().map_err(|_| {
        CliError::Config(format!(
            "FRACLAB_THREADS must be an integer >= 1, got `{raw}`"
        ))
    })?;
    if threads < 1 {
        return Err(CliError::Config(
            "FRACLAB_THREADS must be an integer >= 1, got `0`".to_string(),
        ));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("FRACLAB_THREADS: {e}")))?;
    }
    Ok(())
}

fn real_main() -> Result<i32, CliError> {
    init_threads()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let cfg = RunConfig::load(&config)?;
            runner::run(&cfg, &out)
        }
        Command::CertifyKernel { config, out } => {
            let cfg = RunConfig::load(&config)?;
            runner::certify(&cfg, &out)
        }
        Command::Eval { config, what, out } => {
            let cfg = RunConfig::load(&config)?;
            runner::eval(&cfg, what.into(), &out)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(runner::EXIT_CONFIG as u8)
        }
    }
}
