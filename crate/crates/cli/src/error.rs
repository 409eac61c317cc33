use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("unknown figure {0} (expected 1 to 7)")]
    UnknownFigure(u32),

    #[error(transparent)]
    Model(#[from] multibarrier::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for bad input (including unreadable or unwritable paths), 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if !e.is_validation() && !matches!(e, multibarrier::Error::Io(_)) => 2,
            _ => 1,
        }
    }
}
