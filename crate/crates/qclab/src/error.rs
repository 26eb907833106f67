use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Model { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] qclab_core::Error),
    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn data(path: &Path, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Core(e) if is_usage(e) => 1,
            Error::Internal(_) => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Data { .. } => "data",
            Error::Model { .. } => "model",
            Error::Core(e) if is_usage(e) => "usage",
            Error::Core(_) => "data",
            Error::Internal(_) => "internal",
        }
    }

    /// Single-line JSON object for stderr.
    pub fn to_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            exit: i32,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.kind(),
            exit: self.exit_code(),
            message: self.to_string(),
        })
        .expect("plain struct serializes")
    }
}

/// Core errors caused by an argument rather than by the data.
fn is_usage(e: &qclab_core::Error) -> bool {
    use qclab_core::Error as E;
    matches!(
        e,
        E::InvalidConfig(_) | E::InvalidLevel { .. } | E::InvalidProportion(_)
    )
}

pub fn usage(message: impl Into<String>) -> Error {
    Error::Usage(message.into())
}
