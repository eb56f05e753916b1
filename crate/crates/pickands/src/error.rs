use std::fmt;
use std::process::ExitCode;

use pickands_core::Error as CoreError;

/// Process exit statuses of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// Bad flags, bad input files, IO failures.
    Config = 2,
    /// Embedding failures, bound preconditions, non-convergence.
    Numerical = 3,
}

impl From<ExitStatus> for ExitCode {
    fn from(s: ExitStatus) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Core(CoreError::Domain { .. } | CoreError::InvalidArgument(_)) => ExitStatus::Config,
            CliError::Core(_) | CliError::Numerical(_) => ExitStatus::Numerical,
            _ => ExitStatus::Config,
        }
    }
}
