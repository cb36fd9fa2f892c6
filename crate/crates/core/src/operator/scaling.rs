use crate::error::{Error, Result};
use crate::scalar::{first_nonpositive, Scalar};

/// A pair of strictly positive diagonal scaling vectors: the scaled matrix is
/// `diag(left) · A · diag(right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalScaling<T> {
    left: Vec<T>,
    right: Vec<T>,
}

impl<T: Scalar> DiagonalScaling<T> {
    pub fn new(left: Vec<T>, right: Vec<T>) -> Result<Self> {
        if let Some(index) = first_nonpositive(&left) {
            return Err(Error::NonPositiveScaling { index });
        }
        if let Some(index) = first_nonpositive(&right) {
            return Err(Error::NonPositiveScaling {
                index: left.len() + index,
            });
        }
        Ok(Self { left, right })
    }

    /// Symmetric scaling `diag(x) · A · diag(x)`.
    pub fn symmetric(x: Vec<T>) -> Result<Self> {
        Self::new(x.clone(), x)
    }

    pub fn identity(nrows: usize, ncols: usize) -> Self {
        Self {
            left: vec![T::one(); nrows],
            right: vec![T::one(); ncols],
        }
    }

    pub fn left(&self) -> &[T] {
        &self.left
    }

    pub fn right(&self) -> &[T] {
        &self.right
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.left, self.right)
    }

    pub fn is_symmetric(&self) -> bool {
        self.left == self.right
    }

    /// Componentwise reciprocal; undoes `self` when applied after it.
    pub fn inverse(&self) -> Self {
        let inv = |v: &[T]| v.iter().map(|x| x.recip()).collect();
        Self {
            left: inv(&self.left),
            right: inv(&self.right),
        }
    }

    /// Componentwise square root, mapping a 1-norm scaling of `A ∘ A` to a
    /// 2-norm scaling of `A`.
    pub fn sqrt(&self) -> Self {
        let sq = |v: &[T]| v.iter().map(|x| x.sqrt()).collect();
        Self {
            left: sq(&self.left),
            right: sq(&self.right),
        }
    }

    /// Geometric mean `sqrt(left · right)` of a square scaling, the symmetric
    /// scaling built from a nonsymmetric one.
    pub fn geometric_mean(&self) -> Result<Vec<T>> {
        if self.left.len() != self.right.len() {
            return Err(Error::DimensionMismatch {
                expected: self.left.len(),
                found: self.right.len(),
            });
        }
        Ok(self
            .left
            .iter()
            .zip(&self.right)
            .map(|(&l, &r)| (l * r).sqrt())
            .collect())
    }
}
