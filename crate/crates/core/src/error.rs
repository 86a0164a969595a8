use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameters supplied by the caller or a config file.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called outside its documented domain.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An oracle returned data inconsistent with its own contract.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 for configuration and input problems, 1 for
    /// failures detected while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Io { .. } | Error::Csv(_) => 2,
            Error::Precondition(_) | Error::Invariant(_) => 1,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
