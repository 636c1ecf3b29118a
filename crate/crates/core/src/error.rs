use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: header mismatch, expected columns [{expected}], found [{found}]")]
    HeaderMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("no duplicate links (LinkTypeId=3) between known questions; dataset unusable")]
    NoDuplicateLinks,

    #[error("need at least {needed} pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch for {name}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("too many distinct tokens for exact transport: {count} > {limit}")]
    TransportTooLarge { count: usize, limit: usize },

    #[error(
        "AUC undefined: scores contain a single class ({positives} positive, {negatives} negative)"
    )]
    SingleClass { positives: usize, negatives: usize },

    #[error("version mismatch: {what} is {found}, expected {expected}")]
    VersionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("duplicate results cell ({approach}, {dataset})")]
    DuplicateCell { approach: String, dataset: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            message: message.into(),
        }
    }
}
