use thiserror::Error;

/// Errors raised by the kernel, design, spectral, kriging and optimality routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate in input point")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dense {rows}x{cols} matrix needs {bytes} bytes, over the budget of {budget} bytes")]
    MemoryBudget {
        rows: usize,
        cols: usize,
        bytes: u64,
        budget: u64,
    },

    #[error("symmetric eigensolver did not converge")]
    NoConvergence,

    /// Raised by the triangular factorization; the matrix is numerically
    /// singular and a rank-truncated (pseudo-inverse) fit should be used.
    #[error("cholesky pivot {index} is non-positive ({value:e}); matrix is numerically singular, fit a pseudo-inverse model instead")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("raster resolution {resolution} leaves design point {index} without raster cells")]
    EmptyVoronoiCell { index: usize, resolution: usize },

    #[error("subspace basis is rank deficient")]
    RankDeficient,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
