//! `dls` — train and evaluate piecewise-network least-squares solutions of
//! elliptic interface problems.

mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;

/// Exit code 2: configuration problem. Exit code 3: numeric failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<dls_core::Error> for CliError {
    fn from(e: dls_core::Error) -> Self {
        use dls_core::Error as E;
        match &e {
            E::InvalidConfig(_)
            | E::UnknownProblem { .. }
            | E::InvalidInput(_)
            | E::DimensionMismatch { .. }
            | E::EmptySamples(_)
            | E::NoExactSolution(_) => CliError::Config(e.to_string()),
            E::LevelFailed { source, .. } => match source.as_ref() {
                E::InvalidConfig(_) | E::InvalidInput(_) => CliError::Config(e.to_string()),
                _ => CliError::Numeric(e.to_string()),
            },
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dls",
    about = "Mesh-free deep least-squares solver for elliptic interface problems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct CommonOverrides {
    /// Run directory (defaults to runs/<problem>-<command>-seed<seed>)
    #[arg(long)]
    out: Option<String>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Epoch-count override
    #[arg(long)]
    epochs: Option<u64>,
    /// Spatial-derivative mode override
    #[arg(long, value_parser = ["autodiff", "fd"])]
    derivative_mode: Option<String>,
}

impl CommonOverrides {
    fn into_overrides(self) -> Overrides {
        Overrides {
            out: self.out,
            seed: self.seed,
            epochs: self.epochs,
            derivative_mode: self.derivative_mode,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train on a fixed uniform sample set and write a run directory
    Solve {
        /// Path to the run configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Residual-driven adaptive refinement run
    Adaptive {
        /// Path to the run configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Re-evaluate a saved checkpoint without training
    Evaluate {
        /// Path to a checkpoint written by solve/adaptive
        #[arg(long)]
        checkpoint: PathBuf,
        /// Path to the run configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Evaluation-grid resolution override
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// List the built-in problems
    ListProblems,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config, common } => {
            runner::cmd_solve(&config, &common.into_overrides()).map(|_| ())
        }
        Command::Adaptive { config, common } => {
            runner::cmd_adaptive(&config, &common.into_overrides()).map(|_| ())
        }
        Command::Evaluate {
            checkpoint,
            config,
            grid,
            common,
        } => runner::cmd_evaluate(&checkpoint, &config, grid, &common.into_overrides()),
        Command::ListProblems => {
            runner::cmd_list_problems();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
