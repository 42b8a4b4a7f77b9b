mod args;
mod commands;
mod input;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable input or malformed values: exit 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] lacuna_core::Error),
    #[error("{0}")]
    Failed(String),
}

macro_rules! from_core {
    ($($t:ty),* $(,)?) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

from_core!(
    lacuna_core::sequences::SequenceError,
    lacuna_core::lll::LllError,
    lacuna_core::survivor::SurvivorError,
    lacuna_core::theta_oracle::OracleError,
    lacuna_core::coloring::ColoringError,
    lacuna_core::vdc::VdcError,
);

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    let output = commands::dispatch(cli.command)?;
    match &cli.out {
        Some(path) => fs::write(path, &output.text),
        None => std::io::stdout().lock().write_all(output.text.as_bytes()),
    }
    .map_err(|e| CliError::Failed(format!("writing output: {e}")))?;
    if !output.ok {
        eprintln!("check failed");
    }
    Ok(output.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
