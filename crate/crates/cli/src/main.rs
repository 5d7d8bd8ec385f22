mod args;
mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Resolved;
use manifest::RunManifest;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<hsi_rpca::Error> for CliError {
    fn from(e: hsi_rpca::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let resolved = match &cli.command {
        Command::Simulate(a) => commands::resolve_simulate(a)?,
        Command::Decompose(a) => commands::resolve_decompose(a)?,
        Command::Detect(a) => commands::resolve_detect(a)?,
        Command::Eval(a) => commands::resolve_eval(a)?,
        Command::Sweep(a) => commands::resolve_sweep(a)?,
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest)?;
            let out_dir = match &a.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)
                        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
                    std::fs::canonicalize(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?
                }
                None => m.out_dir.clone(),
            };
            Resolved {
                invocation: m.invocation,
                deterministic: m.deterministic,
                out_dir,
            }
        }
    };
    let (manifest, path) = commands::execute(&resolved)?;
    eprintln!("manifest: {}", path.display());
    Ok(manifest.converged)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: solver stopped at its iteration cap; outputs were written");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
