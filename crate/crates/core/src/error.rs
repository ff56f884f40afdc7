use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: {0}")]
    InputShape(String),

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("circuit is not unitary: {0}")]
    NonUnitary(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("thread {thread_id}: {source}")]
    Thread {
        thread_id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

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
}
