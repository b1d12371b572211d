use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("non-binary labels: found {0} distinct values, expected 2")]
    NonBinaryLabels(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate labels: both classes must be present")]
    DegenerateLabels,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("dataset {index}: {source}")]
    Dataset {
        index: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a dataset identifier to an error raised while processing it.
    pub fn for_dataset(self, index: impl ToString) -> Self {
        Error::Dataset {
            index: index.to_string(),
            source: Box::new(self),
        }
    }

    /// True when the root cause is a filesystem failure rather than a
    /// contract violation.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Dataset { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
