//! `heom`: single simulations, convergence studies, parameter sweeps,
//! offline measures and the self-validation suite.

mod commands;
mod config;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use heom_core::Error;

use config::RunArgs;

/// Exit statuses.
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DIVERGENCE: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn from_usage(e: Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Divergence { .. } => EXIT_DIVERGENCE,
            Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "heom",
    version,
    about = "HEOM exciton dynamics with entanglement and coherence measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagate one parameter point and write trajectory and measures.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Concurrence pairs, e.g. `1,2 3,4`.
        #[arg(long, num_args = 1..)]
        pairs: Vec<String>,
    },
    /// Refine L (then K) until populations agree to the tolerance.
    Converge {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        ladder: commands::LadderArgs,
    },
    /// Run every point of a manifest and tabulate the results.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Manifest file (see `heom manifest`).
        #[arg(long, value_name = "FILE")]
        manifest: PathBuf,
        /// Converge the hierarchy at every point instead of using L and K.
        #[arg(long)]
        converge: bool,
        #[command(flatten)]
        ladder: commands::LadderArgs,
        /// Write measures only, no per-run trajectory files.
        #[arg(long)]
        measures_only: bool,
    },
    /// Compute measures from a trajectory file (internal or external).
    Measure(commands::MeasureArgs),
    /// Write a sweep manifest.
    Manifest(commands::ManifestArgs),
    /// Run the acceptance checks.
    Validate {
        /// Comma-separated subset of checks, e.g. `1,2,8`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { run, pairs } => commands::simulate(&run.resolve()?, &pairs),
        Command::Converge { run, ladder } => commands::converge(&run.resolve()?, &ladder),
        Command::Sweep {
            run,
            manifest,
            converge,
            ladder,
            measures_only,
        } => sweep::sweep(
            &run.resolve()?,
            &manifest,
            &sweep::SweepOptions {
                converge: converge.then_some(ladder),
                write_trajectories: !measures_only,
            },
        ),
        Command::Measure(args) => commands::measure(&args),
        Command::Manifest(args) => commands::manifest(&args),
        Command::Validate { only } => commands::validate(&only),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
