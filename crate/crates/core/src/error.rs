use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pattern character {found:?} at position {position} (expected one of h, l, e, x)")]
    PatternCharacter { position: usize, found: char },

    #[error("access pattern must contain at least one resource block")]
    EmptyPattern,

    #[error("dimension mismatch: expected {expected} resource blocks, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid selection profile: {0}")]
    InvalidProfile(String),

    #[error("observation set must contain at least one pattern")]
    EmptyObservations,

    #[error("number of slots must be at least 1")]
    ZeroSlots,

    #[error("enumeration needs {required} assignments, above the cap of {cap}")]
    BudgetExceeded { required: u128, cap: u64 },

    #[error("no experiment records to summarize")]
    EmptyRecords,

    #[error("no feasible hypothesis: {0}")]
    NoFeasibleHypothesis(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
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
            Error::NoFeasibleHypothesis(_) => 2,
            Error::Io { .. } | Error::Csv { .. } => 3,
            _ => 1,
        }
    }
}
