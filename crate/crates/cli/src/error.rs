use std::io;

use cascade_core::Error as CoreError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    /// The report was written, but the check it describes failed.
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Core(e) => match e {
                CoreError::Domain { .. }
                | CoreError::Config(_)
                | CoreError::NotSubcritical { .. } => EXIT_USAGE,
                _ => EXIT_NUMERIC,
            },
            CliError::CheckFailed(_) => EXIT_NUMERIC,
        }
    }
}
