//! Command-line experiment runner: data generation, trace building,
//! inversion, condition study, and noise sweeps with deterministic file
//! formats.

use std::fmt;
use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod io;

pub use config::{DensitySpec, ExperimentConfig};

/// CLI-level errors, split by exit code: usage and I/O problems exit 1,
/// numerical failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Numeric(sturmtrace::Error),
}

impl CliError {
    pub fn usage(message: String) -> Self {
        CliError::Usage(message)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            // Parameter mismatches surfaced by the library are configuration
            // problems, not numerical failures.
            CliError::Numeric(sturmtrace::Error::InvalidConfig(_)) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(message) => write!(f, "{message}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Numeric(err) => write!(f, "{err}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sturmtrace::Error> for CliError {
    fn from(err: sturmtrace::Error) -> Self {
        CliError::Numeric(err)
    }
}
