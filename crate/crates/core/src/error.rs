use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no valid block partition for dimension {dim}: need a divisor pair with both factors >= 2")]
    NoValidPartition { dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown kind `{0}`")]
    UnknownKind(String),

    #[error("degenerate grid: need at least two observations, got {0}")]
    DegenerateGrid(usize),

    #[error("grid contains a non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid rho {0}: must satisfy |rho| < 1")]
    InvalidRho(f64),

    #[error("invalid dependence order: {0}")]
    InvalidOrder(String),

    #[error("too few blocks: need at least 2, got {0}")]
    TooFewBlocks(usize),

    #[error("zero variance: the variance estimate is {0}, the test is undefined")]
    ZeroVariance(f64),

    #[error("invalid p-value {0}: must lie in [0, 1]")]
    InvalidP(f64),

    #[error("invalid significance level {0}: must lie in (0, 1]")]
    InvalidAlpha(f64),

    #[error("lag ({h1}, {h2}) out of range for a {n}x{m} grid")]
    LagOutOfRange { h1: isize, h2: isize, n: usize, m: usize },

    #[error("covariance of order {size} exceeds the dense size guard {guard}")]
    SizeGuardExceeded { size: usize, guard: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("Cholesky pivot {pivot:e} at index {index} is below the tolerance {tol:e}")]
    SingularFactor { index: usize, pivot: f64, tol: f64 },

    #[error("{dim} of length {len} is not divisible into {parts} tiles")]
    NotDivisible { dim: &'static str, len: usize, parts: usize },

    #[error("insufficient null sample: {0} replications, need at least 100")]
    InsufficientNullSample(usize),

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// `true` for errors that arise from the statistics (as opposed to
    /// input, output or argument problems).
    pub fn is_statistical(&self) -> bool {
        matches!(
            self,
            Error::NoValidPartition { .. }
                | Error::DegenerateGrid(_)
                | Error::TooFewBlocks(_)
                | Error::ZeroVariance(_)
                | Error::SingularFactor { .. }
                | Error::NotSymmetric(_)
                | Error::InsufficientNullSample(_)
                | Error::SizeGuardExceeded { .. }
        )
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
