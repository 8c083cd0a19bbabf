use std::fmt::Display;

use thiserror::Error;

/// Failure classes mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config, missing referenced files. Exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Inputs that exist but cannot be used. Exit code 2.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

pub fn usage(msg: impl Display) -> CliError {
    CliError::Usage(msg.to_string())
}

pub fn data(msg: impl Display) -> CliError {
    CliError::Data(msg.to_string())
}

pub type Result<T> = std::result::Result<T, CliError>;
