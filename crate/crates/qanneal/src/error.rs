//! Error type shared across the workbench.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// An exact method was asked to run past its enumeration or dense-matrix
    /// limit. The message names the limit so callers can pick a different
    /// ground-truth strategy.
    #[error("{what}: requested size {requested} exceeds limit {limit}")]
    Capability {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Eigenvector tracking across the parameter grid lost continuity;
    /// rerun with a finer grid.
    #[error("grid too coarse: {0}; rerun with a finer u-grid")]
    Resolution(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
