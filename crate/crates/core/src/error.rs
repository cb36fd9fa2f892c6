use std::fmt;

use thiserror::Error;

/// Which side of a matrix an index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },

    #[error("matrix must be symmetric")]
    NotSymmetric,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("entry ({row}, {col}) out of bounds for a {nrows}x{ncols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("entry ({row}, {col}) is negative; a nonnegative matrix is required")]
    NegativeEntry { row: usize, col: usize },

    #[error("scaling component {index} is not strictly positive and finite")]
    NonPositiveScaling { index: usize },

    #[error("{axis} {index} is zero")]
    ZeroRowOrColumn { axis: Axis, index: usize },

    #[error("probe annihilated at iteration {iteration} ({axis} side): sum of squared products is zero")]
    DegenerateProbe { iteration: usize, axis: Axis },

    #[error("iteration did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("matrix-vector product budget must be at least 1")]
    InvalidBudget,

    #[error("matrix of order {n} exceeds the dense size cap {cap}")]
    SizeCapExceeded { n: usize, cap: usize },

    #[error("matrix is numerically singular (sigma_max = {sigma_max:e}, sigma_min = {sigma_min:e})")]
    SingularMatrix { sigma_max: f64, sigma_min: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported Matrix Market variant: {0}")]
    UnsupportedFormat(String),

    #[error("matrix generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
