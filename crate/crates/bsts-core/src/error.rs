//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension precondition was violated (empty input, mismatched lengths, ...).
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// Cholesky factorisation hit a non-positive pivot.
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    /// A configuration value is inconsistent or out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violates the documented schema or preconditions.
    #[error("data error: {0}")]
    Data(String),

    /// A numerical operation broke down (non-finite values, underflow, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A Gibbs chain aborted; carries where it happened.
    #[error("chain {chain} failed at iteration {iteration}: {source}")]
    Chain {
        chain: usize,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialisation error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Wrap a step error with its chain/iteration coordinates.
    pub fn in_chain(self, chain: usize, iteration: usize) -> Error {
        Error::Chain {
            chain,
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
