use crate::error::{Error, Result};
use crate::operator::dense::DenseMatrix;
use crate::operator::scaling::DiagonalScaling;
use crate::scalar::Scalar;

/// Explicit-element sparse matrix in compressed sparse row form.
///
/// Rows are stored in order, column indices within a row are strictly
/// increasing, and no stored value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate coordinates are summed in input order; entries that are (or
    /// sum to) zero are dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut triplets: Vec<(usize, usize, T)> = entries.into_iter().collect();
        for &(row, col, v) in &triplets {
            if row >= nrows || col >= ncols {
                return Err(Error::IndexOutOfBounds {
                    row,
                    col,
                    nrows,
                    ncols,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry { row, col });
            }
        }
        // stable, so duplicates are accumulated in the order given
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());

        let mut k = 0;
        while k < triplets.len() {
            let (r, c, mut v) = triplets[k];
            k += 1;
            while k < triplets.len() && triplets[k].0 == r && triplets[k].1 == c {
                v = v + triplets[k].2;
                k += 1;
            }
            if v != T::zero() {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from dense rows, dropping zeros.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().enumerate().map(|(j, &v)| (i, j, v)));
        }
        Self::from_triplets(nrows, ncols, entries)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .expect("diagonal entries are in bounds")
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.nrows)
        } else {
            Err(Error::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            })
        }
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// Iterates over stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Element `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for (i, j, v) in self.iter() {
            let p = next[j];
            col_idx[p] = i;
            values[p] = v;
            next[j] += 1;
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Exact symmetry of both pattern and values.
    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= T::zero())
    }

    /// `y = A x`.
    ///
    /// # Panics
    /// If `x.len() != ncols`.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y = A x` into a caller-provided buffer.
    ///
    /// # Panics
    /// If `x.len() != ncols` or `y.len() != nrows`.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols, "matvec: input length");
        assert_eq!(y.len(), self.nrows, "matvec: output length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `y = Aᵀ x`.
    ///
    /// # Panics
    /// If `x.len() != nrows`.
    pub fn matvec_transpose(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.nrows, "matvec_transpose: input length");
        let mut y = vec![T::zero(); self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] = y[j] + v * xi;
            }
        }
        y
    }

    /// Applies `f` to every stored value, keeping the pattern; zero results
    /// are dropped.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = f(*v);
        }
        if out.values.iter().any(|v| *v == T::zero()) {
            // rebuild to keep the no-stored-zeros invariant
            return Self::from_triplets(out.nrows, out.ncols, out.iter().collect::<Vec<_>>())
                .expect("pattern already validated");
        }
        out
    }

    /// The Hadamard square `A ∘ A`.
    ///
    /// The pattern is unchanged unless a value underflows to zero.
    pub fn elementwise_square(&self) -> Self {
        self.map_values(|v| v * v)
    }

    pub fn abs(&self) -> Self {
        self.map_values(|v| v.abs())
    }

    /// `diag(left) · A · diag(right)`.
    pub fn scale(&self, s: &DiagonalScaling<T>) -> Result<Self> {
        if s.left().len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: s.left().len(),
            });
        }
        if s.right().len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: s.right().len(),
            });
        }
        let (l, r) = (s.left(), s.right());
        let mut out = self.clone();
        for i in 0..self.nrows {
            for p in out.row_ptr[i]..out.row_ptr[i + 1] {
                let j = out.col_idx[p];
                out.values[p] = l[i] * out.values[p] * r[j];
            }
        }
        if out.values.iter().any(|v| *v == T::zero()) {
            return Self::from_triplets(out.nrows, out.ncols, out.iter().collect::<Vec<_>>());
        }
        Ok(out)
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.nrows).map(|i| self.row(i).1.iter().copied().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        self.matvec_transpose(&vec![T::one(); self.nrows])
    }

    /// Squared 2-norm of every row.
    pub fn row_norms_sq(&self) -> Vec<T> {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|&v| v * v).sum())
            .collect()
    }

    /// Squared 2-norm of every column.
    pub fn col_norms_sq(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.ncols];
        for (_, j, v) in self.iter() {
            out[j] = out[j] + v * v;
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut data = vec![T::zero(); self.nrows * self.ncols];
        for (i, j, v) in self.iter() {
            data[i * self.ncols + j] = v;
        }
        DenseMatrix::from_row_major(self.nrows, self.ncols, data)
            .expect("buffer sized from dimensions")
    }
}
