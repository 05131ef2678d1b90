//! `cilp`: run truncation bounds from a JSON configuration.
//!
//! Exit status: 0 success, 1 a validation check failed, 2 configuration
//! error, 3 model error, 4 LP solver failure.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cilp", version, about = "Finite LP bounds for countably-infinite linear programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model's standing assumptions on a finite horizon.
    Validate(RunArgs),
    /// Two-sided bounds for each objective over the schedule.
    Bound(RunArgs),
    /// Lower approximations of the minimal point and its image.
    Minimal(RunArgs),
    /// Every scheme the config selects, over the whole schedule.
    Sweep(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; defaults to the config's `output.dir`, then `cilp-out`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for independent LPs (0 = all cores).
    #[arg(long, env = "CILP_WORKERS")]
    pub workers: Option<usize>,
    /// Seed for the Monte Carlo cross-check.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the relaxed LP with slack on the window boundary.
    #[arg(long)]
    pub relaxed: bool,
    /// Primal feasibility tolerance of the simplex solver.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_MODEL: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<cilp::Error> for Failure {
    fn from(e: cilp::Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

pub fn exit_code(e: &cilp::Error) -> u8 {
    use cilp::Error::*;
    match e {
        Config(_) | Precondition(_) | EnvelopeRequired(_) | TruncationTooSmall { .. } => EXIT_CONFIG,
        MalformedLp(_) => EXIT_SOLVER,
        e if e.is_solver_failure() => EXIT_SOLVER,
        _ => EXIT_MODEL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate(args) => commands::validate(&args),
        Command::Bound(args) => commands::bound(&args),
        Command::Minimal(args) => commands::minimal(&args),
        Command::Sweep(args) => commands::sweep(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
