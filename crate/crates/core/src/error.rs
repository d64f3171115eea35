use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{sensors} sensors exceed the full-DAG cap of {cap}; select sensor subsets first")]
    Capacity { sensors: usize, cap: usize },

    #[error("invalid DAG structure: {0}")]
    InvalidStructure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no classifier for subset {0} in the bank")]
    MissingClassifier(String),

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("cost-sensitive instance has no actions")]
    EmptyActions,

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("model format version {found} is not supported (expected {expected})")]
    IncompatibleModel { found: u32, expected: u32 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("model does not match configuration: {0}")]
    ConfigMismatch(String),

    #[error("training failed: {0}")]
    Training(String),

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

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. }
            | Error::Config(_)
            | Error::ConfigMismatch(_)
            | Error::IncompatibleModel { .. }
            | Error::CorruptModel(_) => 2,
            Error::Parse { .. }
            | Error::Schema(_)
            | Error::DimensionMismatch { .. }
            | Error::Io { .. } => 3,
            Error::InvalidStructure(_)
            | Error::MissingClassifier(_)
            | Error::Degenerate(_)
            | Error::EmptyActions
            | Error::Training(_) => 4,
        }
    }
}
