use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent caller input.
    #[error("invalid input: {0}")]
    Input(String),

    /// Embedding sets that do not share sentence count or dimension.
    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Proportional weights that are all zero.
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    /// Paired differences with zero sample variance. The mean difference is
    /// still reported.
    #[error("degenerate variance: paired differences are constant (delta = {delta})")]
    DegenerateVariance { delta: f64 },

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error(
        "availability mismatch for language `{language}`: need {needed}, index holds {available}"
    )]
    AvailabilityMismatch {
        language: String,
        needed: u64,
        available: u64,
    },

    #[error("index error: {0}")]
    Index(String),

    /// Search spaces too large for exhaustive enumeration.
    #[error("scale error: {0}")]
    Scale(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for this error: 1 input, 2 constraint/degenerate, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Alignment(_)
            | Error::InsufficientData(_)
            | Error::Coverage(_)
            | Error::Index(_)
            | Error::Parse { .. } => 1,
            Error::DegenerateWeights(_)
            | Error::DegenerateVariance { .. }
            | Error::AvailabilityMismatch { .. }
            | Error::Scale(_) => 2,
            Error::Io { .. } => 3,
        }
    }
}
