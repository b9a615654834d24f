use std::process::ExitCode;

/// Failure classes, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 65,
            CliError::Internal(_) => 70,
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Extension for tagging library errors with the class they belong to at the
/// call site.
pub trait Classify<T> {
    fn usage(self) -> CliResult<T>;
    fn data(self) -> CliResult<T>;
    fn internal(self) -> CliResult<T>;
}

impl<T, E: std::fmt::Display> Classify<T> for Result<T, E> {
    fn usage(self) -> CliResult<T> {
        self.map_err(|e| CliError::Usage(e.to_string()))
    }
    fn data(self) -> CliResult<T> {
        self.map_err(|e| CliError::Data(e.to_string()))
    }
    fn internal(self) -> CliResult<T> {
        self.map_err(|e| CliError::Internal(e.to_string()))
    }
}
