mod args;
mod commands;
mod error;
mod manifest;
mod output;
mod sweep;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

/// Worker-pool size; unset or 0 means one worker per core.
const WORKERS_ENV: &str = "GIANT_ATOM_WORKERS";

/// Exit status when every run finished but an invariant check failed.
const EXIT_INVARIANT: u8 = 3;

fn configure_pool() -> CliResult<()> {
    let n = match std::env::var(WORKERS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::usage(format!("{WORKERS_ENV} must be a non-negative integer, got {s:?}")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot start worker pool: {e}")))
}

fn dispatch(cli: &Cli) -> CliResult<commands::Report> {
    match &cli.command {
        Command::Decay(a) => commands::decay::run(a),
        Command::MarkovSolve(a) => commands::markov::run(a),
        Command::Bic(a) => commands::bic::run(a),
        Command::Collision(a) => commands::collision::run(a),
        Command::Chirality(a) => commands::chirality::run(a),
        Command::Crossvalidate(a) => commands::crossvalidate::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_pool().and_then(|()| dispatch(&cli));
    match result {
        Ok(report) if report.violations.is_empty() => ExitCode::SUCCESS,
        Ok(report) => {
            for v in &report.violations {
                eprintln!("invariant violation: {v}");
            }
            ExitCode::from(EXIT_INVARIANT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
