//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation
    /// (nonpositive tail order, negative deviation level, decay exponent
    /// below the admissible range, and so on).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid input: dimension mismatches, violated type
    /// invariants, empty data, malformed configuration.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// No integer block count M satisfies T/(n+1) < M <= T/n.
    #[error("blocking infeasible: no integer in (T/(n+1), T/n] for T={t}, n={n}")]
    BlockingInfeasible { t: u64, n: u64 },

    /// The requested computation cannot be satisfied by any parameter choice,
    /// e.g. a nominal failure level below the irreducible coupling probability.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Exit code used by the CLI: 2 validation, 3 infeasible, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Invalid(_) => 2,
            Error::BlockingInfeasible { .. } | Error::Infeasible(_) => 3,
            Error::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
