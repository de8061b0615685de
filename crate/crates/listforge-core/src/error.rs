use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid email address: {0:?}")]
    InvalidEmail(String),
    #[error("invalid year-month: {0:?}")]
    InvalidYearMonth(String),
    #[error("empty name")]
    EmptyName,
}

/// Errors from reading or writing the on-disk warehouse.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("warehouse directory not found: {0}")]
    MissingDirectory(PathBuf),
    #[error("{path}:{line}: XML parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("warehouse is invalid: {0} violation(s), first: {1}")]
    Invalid(usize, String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl StoreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Errors from identity resolution operations.
#[derive(Debug, Error)]
pub enum IdentityError {
    #[error("unknown actor id: {0}")]
    UnknownActor(String),
    #[error("cannot merge an actor with itself: {0}")]
    SelfMerge(String),
    #[error("message {0} was not sent through a configured gateway address")]
    NotGateway(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from ingesting raw archives.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("archive path not found: {0}")]
    MissingArchive(PathBuf),
    #[error("undecodable input stream: {0}")]
    Undecodable(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Errors from external-source integration.
#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("line {0}: malformed bibliography document: {1}")]
    Parse(usize, String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Errors from export and rendering.
#[derive(Debug, Error)]
pub enum ExportError {
    #[error("unwritable path {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown output format: {0:?}")]
    UnknownFormat(String),
    #[error("write error: {0}")]
    Write(#[from] std::io::Error),
}
