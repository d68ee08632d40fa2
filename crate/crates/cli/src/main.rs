mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numeric(hillspec_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<hillspec_core::Error> for CliError {
    fn from(e: hillspec_core::Error) -> Self {
        match e {
            hillspec_core::Error::InvalidParameter(msg) => CliError::Validation(msg),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Verification(_) => 3,
            CliError::Numeric(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 2,
        }
    }
}

/// Sizes the global rayon pool from `HILLSPEC_THREADS` (0 or unset means automatic).
fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HILLSPEC_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("HILLSPEC_THREADS must be a non-negative integer, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Profile { common, samples, trajectory } => {
            let cfg = RunConfig::from_args(&common, Format::Json)?;
            commands::profile(&cfg, samples, trajectory.as_deref())
        }
        Command::Discriminant { common, range, operator, k } => {
            let cfg = RunConfig::from_args(&common, Format::Csv)?;
            commands::discriminant(&cfg, &range, operator, k)
        }
        Command::Spectrum { common, range, operator, ceiling, k_max } => {
            let cfg = RunConfig::from_args(&common, Format::Json)?;
            commands::spectrum(&cfg, &range, operator, ceiling, k_max)
        }
        Command::Verify { common, range, samples } => {
            let cfg = RunConfig::from_args(&common, Format::Json)?;
            commands::verify(&cfg, &range, samples)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hillspec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
