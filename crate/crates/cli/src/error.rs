use std::io;
use std::path::PathBuf;

/// Failures of a CLI command, mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] coexist_core::Error),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for usage, configuration and precondition errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(coexist_core::Error::Precondition(_))
            | CliError::Core(coexist_core::Error::GridMismatch(_))
            | CliError::Usage(_)
            | CliError::Config { .. }
            | CliError::Invalid(_)
            | CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
