//! Batch driver: factorize a matrix, evaluate clustering quality against
//! labels, or sweep an orthogonality weight over a list of values.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O or parse
//! error, 3 numerical failure (damping cap reached).

mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not failures.
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(orthnmf::Error::Config(_)) => 1,
            CliError::Lib(orthnmf::Error::DampingFailure { .. }) => 3,
            CliError::Lib(_) => 2,
        }
    }
}
