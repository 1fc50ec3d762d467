//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cholesky factorization hit a non-positive pivot; the matrix is not
    /// positive definite. Carries the index of the failing pivot.
    #[error("matrix is not positive definite: pivot {pivot} is {value:.6e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// The design matrix has (numerically) linearly dependent columns.
    #[error("design matrix is collinear: normal-equation pivot {pivot} is not positive")]
    CollinearDesign { pivot: usize },

    /// Two routes to the same quantity disagreed beyond tolerance.
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    /// A tabular input could not be parsed. Rows are 1-based and include the
    /// header line, matching what an editor shows.
    #[error("parse error at {path}:{row}: {message}")]
    Parse {
        path: String,
        row: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
