use thiserror::Error;

/// Failures of a CLI invocation, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Validation(String),

    #[error("{0}")]
    Postselection(String),

    #[error("{0}")]
    Other(String),
}

impl CliError {
    /// 2 for postselection failures, 3 for invalid input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 3,
            CliError::Postselection(_) => 2,
            CliError::Other(_) => 1,
        }
    }

    /// Tag a library error raised while checking the named config field.
    pub fn field(name: &str, err: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{name}: {err}"))
    }
}

impl From<weakmeas::Error> for CliError {
    fn from(e: weakmeas::Error) -> Self {
        match e {
            weakmeas::Error::PostselectionImpossible { mass } => {
                CliError::Postselection(format!("postselection mass below threshold ({mass:.3e})"))
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
