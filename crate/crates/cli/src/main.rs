//! `ull`: simulations, theory tables and sketch file manipulation.

mod commands;
mod sketch_cmd;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

/// Marks an error as caused by invalid user input (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Parser)]
#[command(name = "ull", version, about = "UltraLogLog sketches, estimators and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo estimation-error experiment, written as CSV.
    Simulate(commands::SimulateArgs),
    /// Fisher information, entropy and MVP figures of register configurations.
    Theory(commands::TheoryArgs),
    /// Optimal estimator exponent and coefficients as JSON.
    Optimize(commands::OptimizeArgs),
    /// Prints the built-in FGRA constants and checks them against a fresh optimization.
    Constants,
    /// Create, merge, downsize, inspect and query serialized sketches.
    #[command(subcommand)]
    Sketch(sketch_cmd::SketchCommand),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Theory(args) => commands::theory(args),
        Command::Optimize(args) => commands::optimize(args),
        Command::Constants => commands::constants(),
        Command::Sketch(cmd) => sketch_cmd::run(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
