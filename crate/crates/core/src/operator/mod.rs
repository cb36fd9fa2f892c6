//! Matrix-free operator abstraction and the explicit matrix backends.
//!
//! The stochastic algorithms see a matrix only through [`LinearOperator`],
//! which exposes dimensions and the two products `A x` and `Aᵀ x`. The trait has
//! no element accessor.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::scalar::Scalar;

pub mod dense;
pub mod scaling;
pub mod sparse;

pub use dense::DenseMatrix;
pub use scaling::DiagonalScaling;
pub use sparse::SparseMatrix;

/// A real linear map `A: R^ncols -> R^nrows` known only through products.
///
/// Implementations must be deterministic and must satisfy
/// `u · apply(v) == apply_transpose(u) · v` up to roundoff. Both methods take
/// `&self` so an operator can be shared between threads.
pub trait LinearOperator<T: Scalar> {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `A x`; `x.len()` must equal `ncols()`.
    fn apply(&self, x: &[T]) -> Vec<T>;

    /// `Aᵀ x`; `x.len()` must equal `nrows()`.
    fn apply_transpose(&self, x: &[T]) -> Vec<T>;
}

impl<T: Scalar, O: LinearOperator<T> + ?Sized> LinearOperator<T> for &O {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[T]) -> Vec<T> {
        (**self).apply(x)
    }
    fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        (**self).apply_transpose(x)
    }
}

impl<T: Scalar, O: LinearOperator<T> + ?Sized> LinearOperator<T> for Box<O> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[T]) -> Vec<T> {
        (**self).apply(x)
    }
    fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        (**self).apply_transpose(x)
    }
}

impl<T: Scalar> LinearOperator<T> for SparseMatrix<T> {
    fn nrows(&self) -> usize {
        SparseMatrix::nrows(self)
    }
    fn ncols(&self) -> usize {
        SparseMatrix::ncols(self)
    }
    fn apply(&self, x: &[T]) -> Vec<T> {
        self.matvec(x)
    }
    fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        self.matvec_transpose(x)
    }
}

/// Operator view of a sparse matrix that hides the stored elements.
#[derive(Debug, Clone)]
pub struct SparseOperator<T> {
    matrix: SparseMatrix<T>,
}

/// Wraps `m` as an opaque operator.
pub fn from_sparse<T: Scalar>(m: SparseMatrix<T>) -> SparseOperator<T> {
    SparseOperator { matrix: m }
}

impl<T: Scalar> LinearOperator<T> for SparseOperator<T> {
    fn nrows(&self) -> usize {
        self.matrix.nrows()
    }
    fn ncols(&self) -> usize {
        self.matrix.ncols()
    }
    fn apply(&self, x: &[T]) -> Vec<T> {
        self.matrix.matvec(x)
    }
    fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        self.matrix.matvec_transpose(x)
    }
}

/// Operator defined by user callbacks for `A x` and `Aᵀ x`.
pub struct FnOperator<F, G> {
    nrows: usize,
    ncols: usize,
    apply: F,
    apply_transpose: G,
}

impl<F, G> FnOperator<F, G> {
    pub fn new(nrows: usize, ncols: usize, apply: F, apply_transpose: G) -> Self {
        Self {
            nrows,
            ncols,
            apply,
            apply_transpose,
        }
    }
}

impl<T, F, G> LinearOperator<T> for FnOperator<F, G>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
    G: Fn(&[T]) -> Vec<T>,
{
    fn nrows(&self) -> usize {
        self.nrows
    }
    fn ncols(&self) -> usize {
        self.ncols
    }
    fn apply(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.ncols);
        let y = (self.apply)(x);
        assert_eq!(y.len(), self.nrows, "callback returned wrong length");
        y
    }
    fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.nrows);
        let y = (self.apply_transpose)(x);
        assert_eq!(y.len(), self.ncols, "callback returned wrong length");
        y
    }
}

/// Wrapper recording how many products were requested from the inner operator.
#[derive(Debug)]
pub struct CountingOperator<O> {
    inner: O,
    applies: AtomicUsize,
    transpose_applies: AtomicUsize,
}

impl<O> CountingOperator<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            applies: AtomicUsize::new(0),
            transpose_applies: AtomicUsize::new(0),
        }
    }

    pub fn applies(&self) -> usize {
        self.applies.load(Ordering::Relaxed)
    }

    pub fn transpose_applies(&self) -> usize {
        self.transpose_applies.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<T: Scalar, O: LinearOperator<T>> LinearOperator<T> for CountingOperator<O> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn apply(&self, x: &[T]) -> Vec<T> {
        self.applies.fetch_add(1, Ordering::Relaxed);
        self.inner.apply(x)
    }
    fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        self.transpose_applies.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_transpose(x)
    }
}
