use std::path::PathBuf;

/// Failures of the experiment driver, grouped by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] duopoly_core::Error),
    #[error("{0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot draw {path}: {reason}")]
    Chart { path: PathBuf, reason: String },
}

impl Error {
    /// 1 for bad input, 2 for solver failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Invalid(_) | Error::Model(_) => 1,
            Error::Solver(_) => 2,
            Error::Io { .. } | Error::Chart { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
