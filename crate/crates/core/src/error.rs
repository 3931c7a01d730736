use alloc::string::String;

use crate::metric::Side;

/// Errors raised by sample validation, estimation, simulation, and the
/// decision procedures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: {xs} x rows vs {ys} y rows")]
    LengthMismatch { xs: usize, ys: usize },

    #[error("row {row}: {side} point has dimension {found}, metric expects {expected}")]
    DimensionMismatch {
        side: Side,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: non-finite {side} coordinate at column {col}")]
    NonFinite { side: Side, row: usize, col: usize },

    #[error("sample must contain at least one observation")]
    EmptySample,

    #[error("invalid metric: {0}")]
    BadMetric(String),

    #[error("invalid weighting measure: {0}")]
    BadGamma(String),

    #[error("brute-force V-statistic is limited to n <= {max}, got n = {n}")]
    BruteForceTooLarge { n: usize, max: usize },

    #[error("time grid must start at 0, end at 1, and be strictly increasing (index {index})")]
    BadTimeGrid { index: usize },

    #[error("weighting measure atom {lambda} is not on the simulated path grid")]
    GridMismatch { lambda: f64 },

    #[error("Monte Carlo runs below the floor: {runs} < {min}")]
    TooFewRuns { runs: u64, min: u64 },

    #[error("quantile table has no entry for p = {p}")]
    MissingQuantile { p: f64 },

    #[error("invalid quantile table: {0}")]
    BadTable(String),

    #[error("VAR transition matrix is unstable: spectral radius {radius}")]
    UnstableVar { radius: f64 },

    #[error("innovation covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    BadParam(String),

    #[error("numeric invariant violated: {0}")]
    Numeric(String),
}
