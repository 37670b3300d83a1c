//! Command-line front end for the plaquelab solvers.
//!
//! Verbs: `run` (single scenario), `study` (parameter/convergence sweeps),
//! `report` (summarize previous outputs). Scenario wiring lands together with
//! the remaining solver modules; the argument surface and exit-code contract
//! are already fixed here.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 verification failure.

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "plaquelab",
    version,
    about = "Two-phase flow / interface-growth laboratory"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run a single scenario from a configuration file.
    Run {
        /// Path to a `key = value` configuration file.
        config: std::path::PathBuf,
    },
    /// Run a parameter or grid-refinement study.
    Study {
        /// Path to a `key = value` configuration file.
        config: std::path::PathBuf,
    },
    /// Summarize the outputs of previous runs.
    Report {
        /// Output directory of a previous run or study.
        dir: std::path::PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.verb {
        Verb::Run { config } | Verb::Study { config } => {
            eprintln!(
                "error: scenario execution is not wired up yet (config: {})",
                config.display()
            );
            ExitCode::from(2)
        }
        Verb::Report { dir } => {
            eprintln!(
                "error: report generation is not wired up yet (dir: {})",
                dir.display()
            );
            ExitCode::from(2)
        }
    }
}
