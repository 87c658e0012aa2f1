use thiserror::Error;

use crate::model::{MomentVariant, Violation};
use crate::solver::SolverError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("moment variant `{0}` needs `{1}` data")]
    MissingMomentData(MomentVariant, &'static str),
    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Parse(String),
    #[error("missing section `{0}`")]
    MissingSection(String),
    #[error("unsupported schema version {found}, expected {expected}")]
    SchemaVersion { found: u64, expected: u64 },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Self::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Self::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
