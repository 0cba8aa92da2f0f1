//! CLI error type carrying the process exit code.
//!
//! Exit codes: 0 success, 2 configuration or input problem, 3 capacity
//! guard, 4 integration failure, 5 comparison over tolerance.

use std::fmt;
use std::io;

#[derive(Debug)]
pub enum CliError {
    /// Bad config file, bad flags, unusable inputs, or I/O trouble.
    Config(String),
    /// Engine error from the simulation library.
    Engine(lambda_sr::Error),
    /// A compare run exceeded its tolerance.
    CompareFailed(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(e) => match e {
                lambda_sr::Error::Capacity { .. } => 3,
                lambda_sr::Error::Integration { .. } => 4,
                _ => 2,
            },
            CliError::CompareFailed(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::CompareFailed(msg) => write!(f, "comparison failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lambda_sr::Error> for CliError {
    fn from(e: lambda_sr::Error) -> Self {
        CliError::Engine(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}
