use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Io,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("no instruction lines found in {0}")]
    EmptyFile(String),

    #[error("unknown opcode `{0}` (not in vocabulary)")]
    UnknownOpcode(String),

    #[error("all losses are equal; standardization is undefined")]
    DegenerateTable,

    #[error("conditioning {0} matches no rows")]
    EmptyCondition(String),

    #[error("no undetermined factor has a level with support >= {min_support}")]
    SupportExhausted { min_support: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("checksum mismatch in {path} at line {line}")]
    Checksum { path: PathBuf, line: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Dimension { .. } | Error::Internal(_) | Error::NonFinite(_) => {
                ErrorKind::Internal
            }
            Error::Io(_) | Error::Path { .. } => ErrorKind::Io,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Path { path, source }
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
