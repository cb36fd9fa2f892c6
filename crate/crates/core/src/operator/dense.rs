use crate::error::{Error, Result};
use crate::operator::sparse::SparseMatrix;
use crate::operator::LinearOperator;
use crate::scalar::Scalar;

/// Row-major dense matrix. Used as a second operator backend and as the
/// densified form for condition numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                expected: nrows * ncols,
                found: data.len(),
            });
        }
        Ok(Self { nrows, ncols, data })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_sparse(&self) -> SparseMatrix<T> {
        let entries = (0..self.nrows)
            .flat_map(|i| (0..self.ncols).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.get(i, j)));
        SparseMatrix::from_triplets(self.nrows, self.ncols, entries.collect::<Vec<_>>())
            .expect("dense entries are in bounds")
    }
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols, "apply: input length");
        self.data
            .chunks_exact(self.ncols.max(1))
            .take(self.nrows)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.nrows, "apply_transpose: input length");
        let mut y = vec![T::zero(); self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            let row = &self.data[i * self.ncols..(i + 1) * self.ncols];
            for (yj, &a) in y.iter_mut().zip(row) {
                *yj = *yj + a * xi;
            }
        }
        y
    }
}
