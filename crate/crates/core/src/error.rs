use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("ingestion error in {dataset}: {message}")]
    Ingest { dataset: String, message: String },

    #[error("metadata error for {dataset}: {message}")]
    Metadata { dataset: String, message: String },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("unknown attribute(s) in {dataset}: {}", missing.join(", "))]
    UnknownAttributes {
        dataset: String,
        missing: Vec<String>,
    },

    #[error("stale reference: dataset {0} is no longer in the store")]
    StaleReference(String),

    #[error("input is not valid UTF-8: {0}")]
    Decode(#[from] std::str::Utf8Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty document")]
    EmptyDocument,

    #[error("degenerate clustering input: {0}")]
    DegenerateInput(String),

    #[error("topic model error: {0}")]
    TopicModel(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("policy validation failed: {0}")]
    Policy(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("classifier error: {0}")]
    Classifier(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
