//! Shared error type for the screening toolkit.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects or series that must agree in length do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// An operation received an empty collection.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value in {what} at position {index}")]
    NonFinite { what: &'static str, index: usize },

    /// A configuration or argument value is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// More partition cells requested than observations available.
    #[error("infeasible partition: {cells} cells for {samples} observations")]
    InfeasiblePartition { cells: usize, samples: usize },

    /// All target values are identical, so quantile cells are undefined.
    #[error("degenerate target: all {0} values are identical")]
    DegenerateTarget(usize),

    /// Not enough observations for the requested estimator.
    #[error("insufficient data: need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    /// Box constraints cannot satisfy the budget constraint.
    #[error("infeasible cap: {dim} weights capped at {cap} cannot sum to 1")]
    InfeasibleCap { dim: usize, cap: f64 },

    /// A covariance input has a clearly negative eigenvalue.
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    /// A spot-volatility grid position falls outside the return series.
    #[error("grid index {index} out of range for {len} returns")]
    GridIndexOutOfRange { index: usize, len: usize },

    /// A price that must be strictly positive is not.
    #[error("nonpositive price {value} at position {index}")]
    NonPositivePrice { index: usize, value: f64 },

    /// Malformed content in an input file, located by line.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Underlying I/O failure, annotated with the path.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Whether the error stems from input data/files rather than
    /// configuration. Drives the CLI exit-code split.
    pub fn is_data(&self) -> bool {
        matches!(
            self,
            Error::NonPositivePrice { .. } | Error::Parse { .. } | Error::Io { .. }
        )
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
