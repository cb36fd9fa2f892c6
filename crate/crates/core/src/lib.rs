//! Diagonal equilibration of sparse and matrix-free operators.
//!
//! The centerpiece is [`stochastic`]: approximate 2-norm equilibration
//! (binormalization) of signed square matrices that touches the matrix only
//! through products `A x` and `Aᵀ x` with Gaussian probe vectors. Around it sit
//! exact Sinkhorn–Knopp baselines ([`exact`]), scalability predicates
//! ([`structure`]), quality metrics ([`diagnostics`]), Matrix Market and report
//! I/O ([`io`]), a reproducible test-matrix generator ([`corpus`]) and the
//! batch experiment driver ([`experiment`]).
//!
//! All algorithms are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the I/O and experiment layers
//! use.

pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod io;
pub mod operator;
pub mod scalar;
pub mod stochastic;
pub mod structure;

pub use error::{Axis, Error, Result};
pub use operator::{
    from_sparse, CountingOperator, DenseMatrix, DiagonalScaling, FnOperator, LinearOperator,
    SparseMatrix, SparseOperator,
};
pub use scalar::Scalar;

/// Double-precision sparse matrix.
pub type Matrix = SparseMatrix<f64>;
/// Single-precision sparse matrix.
pub type Matrix32 = SparseMatrix<f32>;
/// Double-precision diagonal scaling.
pub type Scaling = DiagonalScaling<f64>;
/// Single-precision diagonal scaling.
pub type Scaling32 = DiagonalScaling<f32>;
/// Double-precision dense matrix.
pub type Dense = DenseMatrix<f64>;
