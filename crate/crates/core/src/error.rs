use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("node {0} has no neighbors")]
    IsolatedNode(usize),

    #[error("every node is isolated")]
    AllIsolated,

    #[error("single-class training set: every label is {0}")]
    SingleClass(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("index {index} out of range for {n} nodes ({context})")]
    IndexOutOfRange {
        context: String,
        index: usize,
        n: usize,
    },

    #[error("labels must cover 0..{n_classes} without gaps; class {missing} never occurs")]
    LabelGap { n_classes: usize, missing: usize },

    #[error("missing coverage: method {method} has no results on dataset {dataset}")]
    MissingCoverage { method: String, dataset: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
