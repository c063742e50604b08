use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("missing required key `{key}`: {reason}")]
    MissingKey { key: &'static str, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] deepcorr::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    /// 2 for configuration and contract problems, 3 for numeric failures,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use deepcorr::Error as E;
        match self {
            CliError::Config { .. } | CliError::MissingKey { .. } | CliError::Invalid(_) | CliError::Checkpoint { .. } => 2,
            CliError::Core(E::NonFinite(_)) => 3,
            CliError::Core(E::Shape { .. } | E::Contract(_) | E::Format(_) | E::Json(_)) => 2,
            CliError::Io { .. } | CliError::Core(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
