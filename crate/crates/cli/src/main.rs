//! `cascade-gamma`: command-line front end for `cascade-core`.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical failure
//! (including a `verify` whose residuals exceed the tolerance).

mod args;
mod commands;
mod config_file;
mod error;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, EXIT_USAGE};

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Density(a) => commands::density(a),
        Command::Pmf(a) => commands::pmf(a),
        Command::Moments(a) => commands::moments(a),
        Command::Extinction(a) => commands::extinction(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
    }
}

fn main() -> ExitCode {
    let argv = match config_file::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
