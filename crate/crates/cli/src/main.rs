//! `mtm`: fit trimmed-moment estimators, tabulate asymptotic efficiencies,
//! run simulation studies and produce goodness-of-fit tables.
//!
//! Exit codes: 0 success, 1 input/output error, 2 invalid flags or data,
//! 3 estimation failure.

mod args;
mod commands;
mod failure;

use clap::{Parser, Subcommand};
use failure::Failure;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "mtm",
    version,
    about = "Method of trimmed moments for normal, lognormal and Fréchet models"
)]
struct Cli {
    /// Worker threads for grid and simulation commands.
    #[arg(long, global = true, env = "MTM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one dataset and print the estimates as JSON.
    Fit(commands::FitArgs),
    /// Asymptotic relative efficiency over a parameter grid, as CSV.
    Are(commands::AreArgs),
    /// Monte Carlo study of bias and efficiency, as CSV.
    Simulate(commands::SimulateArgs),
    /// Goodness-of-fit table for the lognormal and Fréchet models.
    Gof(commands::GofArgs),
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Validation(format!("cannot start {t} threads: {e}")))?;
    }
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Are(a) => commands::are_grid(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Gof(a) => commands::gof(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
