//! `bidisk`: classify torus points of Schur functions on the bidisk.
//!
//! Exit codes: 0 on success (any verdict), 1 on configuration or input
//! errors, 2 on numerical faults.

mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match run::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
