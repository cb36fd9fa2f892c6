//! Equilibration baselines that read matrix elements directly.
//!
//! * [`sinkhorn_knopp`]: `r ← (B c)⁻¹`, `c ← (Bᵀ r)⁻¹` on a nonnegative `B`.
//! * [`sym_sinkhorn_knopp`]: `y ← (B y)⁻¹` with the paired iterate
//!   `x = sqrt(y_new · y_old)`, which is stable for reducible and oscillating
//!   symmetric problems.
//! * [`equilibrate_2norm`]: binormalization of a signed `A` via `B = A ∘ A`.
//! * [`jacobi_scale`] and [`inf_norm_scale`]: one-shot scalings.
//!
//! The iterations stop when every row and column sum of the scaled matrix is
//! within `tol` of one. Running out of iterations is not an error: the best
//! iterate is returned with `converged == false`.

use crate::error::{Axis, Error, Result};
use crate::operator::{DiagonalScaling, SparseMatrix};
use crate::scalar::{first_nonpositive, Scalar};

#[derive(Debug, Clone)]
pub struct ExactOptions<T> {
    /// Bound on `max |row or column sum - 1|` of the scaled matrix.
    pub tol: T,
    pub max_iters: usize,
    /// Starting vector (`c⁰`, or `y⁰` for the symmetric iteration); all ones
    /// when `None`.
    pub start: Option<Vec<T>>,
}

impl<T: Scalar> Default for ExactOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iters: 10_000,
            start: None,
        }
    }
}

impl<T: Scalar> ExactOptions<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_start(mut self, start: Vec<T>) -> Self {
        self.start = Some(start);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    fn start_vector(&self, n: usize) -> Result<Vec<T>> {
        match &self.start {
            None => Ok(vec![T::one(); n]),
            Some(v) if v.len() != n => Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            }),
            Some(v) => match first_nonpositive(v) {
                Some(index) => Err(Error::NonPositiveScaling { index }),
                None => Ok(v.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub row_deviation: T,
    pub col_deviation: T,
}

impl<T: Scalar> IterationRecord<T> {
    pub fn max_deviation(&self) -> T {
        self.row_deviation.max(self.col_deviation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceHistory<T> {
    pub records: Vec<IterationRecord<T>>,
}

impl<T> Default for ConvergenceHistory<T> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
        }
    }
}

impl<T: Scalar> ConvergenceHistory<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord<T>> {
        self.records.last()
    }

    fn push(&mut self, iteration: usize, row_deviation: T, col_deviation: T) {
        self.records.push(IterationRecord {
            iteration,
            row_deviation,
            col_deviation,
        });
    }
}

/// Outcome of an exact iteration.
#[derive(Debug, Clone)]
pub struct Equilibration<S, T> {
    /// Final iterate if converged, otherwise the iterate with the smallest
    /// deviation seen.
    pub scaling: S,
    pub history: ConvergenceHistory<T>,
    pub converged: bool,
}

impl<S, T> Equilibration<S, T> {
    /// The scaling, or [`Error::NotConverged`].
    pub fn into_converged(self) -> Result<S> {
        if self.converged {
            Ok(self.scaling)
        } else {
            Err(Error::NotConverged {
                iterations: self.history.records.len(),
            })
        }
    }

    fn map<U>(self, f: impl FnOnce(S) -> U) -> Equilibration<U, T> {
        Equilibration {
            scaling: f(self.scaling),
            history: self.history,
            converged: self.converged,
        }
    }
}

fn check_nonnegative<T: Scalar>(b: &SparseMatrix<T>) -> Result<()> {
    match b.iter().find(|&(_, _, v)| v < T::zero()) {
        Some((row, col, _)) => Err(Error::NegativeEntry { row, col }),
        None => Ok(()),
    }
}

fn check_no_zero_lines<T: Scalar>(b: &SparseMatrix<T>) -> Result<()> {
    if let Some(index) = (0..b.nrows()).find(|&i| b.row(i).0.is_empty()) {
        return Err(Error::ZeroRowOrColumn {
            axis: Axis::Row,
            index,
        });
    }
    let mut seen = vec![false; b.ncols()];
    for (_, j, _) in b.iter() {
        seen[j] = true;
    }
    if let Some(index) = seen.iter().position(|s| !s) {
        return Err(Error::ZeroRowOrColumn {
            axis: Axis::Column,
            index,
        });
    }
    Ok(())
}

fn reciprocal<T: Scalar>(v: &[T], axis: Axis) -> Result<Vec<T>> {
    v.iter()
        .enumerate()
        .map(|(index, &x)| {
            if x > T::zero() {
                Ok(x.recip())
            } else {
                Err(Error::ZeroRowOrColumn { axis, index })
            }
        })
        .collect()
}

fn reciprocal_into<T: Scalar>(v: &[T], out: &mut [T], axis: Axis) -> Result<()> {
    for (index, (o, &x)) in out.iter_mut().zip(v).enumerate() {
        if x > T::zero() {
            *o = x.recip();
        } else {
            return Err(Error::ZeroRowOrColumn { axis, index });
        }
    }
    Ok(())
}

/// `max_i |x_i y_i - 1|`.
fn deviation<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| (a * b - T::one()).abs())
        .fold(T::zero(), T::max)
}

/// Sinkhorn–Knopp on a square nonnegative `b`, returning `(r, c)` such that
/// `diag(r) · b · diag(c)` is doubly stochastic.
pub fn sinkhorn_knopp<T: Scalar>(
    b: &SparseMatrix<T>,
    opts: &ExactOptions<T>,
) -> Result<Equilibration<DiagonalScaling<T>, T>> {
    opts.validate()?;
    let n = b.require_square()?;
    check_nonnegative(b)?;
    check_no_zero_lines(b)?;

    // the transpose product runs as a row-oriented product on a copy
    let bt = b.transpose();
    let mut c = opts.start_vector(n)?;
    let mut bc = b.matvec(&c);
    let mut r = vec![T::zero(); n];
    let mut btr = vec![T::zero(); n];
    let mut history = ConvergenceHistory::default();
    let mut best = (T::infinity(), vec![T::zero(); n], vec![T::zero(); n]);
    let mut converged = false;

    for k in 1..=opts.max_iters {
        reciprocal_into(&bc, &mut r, Axis::Row)?;
        bt.matvec_into(&r, &mut btr);
        reciprocal_into(&btr, &mut c, Axis::Column)?;
        b.matvec_into(&c, &mut bc);

        let row_dev = deviation(&r, &bc);
        let col_dev = deviation(&c, &btr);
        history.push(k, row_dev, col_dev);

        let dev = row_dev.max(col_dev);
        if dev < best.0 || k == 1 {
            best.0 = dev;
            best.1.copy_from_slice(&r);
            best.2.copy_from_slice(&c);
        }
        if row_dev < opts.tol && col_dev < opts.tol {
            converged = true;
            break;
        }
    }

    let (_, r, c) = best;
    Ok(Equilibration {
        scaling: DiagonalScaling::new(r, c)?,
        history,
        converged,
    })
}

/// State of the symmetric iteration `y ← (B y)⁻¹`, `x = sqrt(y_new · y_old)`.
///
/// Only `y` drives the iteration; `x` is formed on request.
#[derive(Debug, Clone)]
pub struct SymmetricSinkhornKnopp<'a, T> {
    b: &'a SparseMatrix<T>,
    y: Vec<T>,
    y_prev: Vec<T>,
    steps: usize,
}

impl<'a, T: Scalar> SymmetricSinkhornKnopp<'a, T> {
    pub fn new(b: &'a SparseMatrix<T>, y0: Vec<T>) -> Result<Self> {
        let n = b.require_square()?;
        if y0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y0.len(),
            });
        }
        if let Some(index) = first_nonpositive(&y0) {
            return Err(Error::NonPositiveScaling { index });
        }
        Ok(Self {
            b,
            y_prev: y0.clone(),
            y: y0,
            steps: 0,
        })
    }

    /// Advances one iteration and returns the new `y`.
    pub fn step(&mut self) -> Result<&[T]> {
        let by = self.b.matvec(&self.y);
        let next = reciprocal(&by, Axis::Row)?;
        self.y_prev = std::mem::replace(&mut self.y, next);
        self.steps += 1;
        Ok(&self.y)
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Paired iterate `sqrt(y · y_prev)`; equals `y` before the first step.
    pub fn x(&self) -> Vec<T> {
        self.y
            .iter()
            .zip(&self.y_prev)
            .map(|(&a, &b)| (a * b).sqrt())
            .collect()
    }
}

/// Symmetric Sinkhorn–Knopp on a symmetric nonnegative `b`, returning `x` with
/// `diag(x) · b · diag(x)` doubly stochastic.
pub fn sym_sinkhorn_knopp<T: Scalar>(
    b: &SparseMatrix<T>,
    opts: &ExactOptions<T>,
) -> Result<Equilibration<Vec<T>, T>> {
    opts.validate()?;
    let n = b.require_square()?;
    if !b.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    check_nonnegative(b)?;
    check_no_zero_lines(b)?;

    let mut it = SymmetricSinkhornKnopp::new(b, opts.start_vector(n)?)?;
    let mut history = ConvergenceHistory::default();
    let mut best: Option<(T, Vec<T>)> = None;
    let mut converged = false;

    for k in 1..=opts.max_iters {
        it.step()?;
        let x = it.x();
        let dev = deviation(&x, &b.matvec(&x));
        // row and column sums coincide for a symmetric scaling
        history.push(k, dev, dev);
        if best.as_ref().is_none_or(|(d, _)| dev < *d) {
            best = Some((dev, x));
        }
        if dev < opts.tol {
            converged = true;
            break;
        }
    }

    let (_, x) = best.expect("at least one iteration");
    if let Some(index) = first_nonpositive(&x) {
        return Err(Error::NonPositiveScaling { index });
    }
    Ok(Equilibration {
        scaling: x,
        history,
        converged,
    })
}

/// Scales a signed square `a` to unit row and column 2-norms.
///
/// Equilibrates `B = a ∘ a` in the 1-norm and takes square roots of the
/// scaling once at the end. Symmetric input goes through
/// [`sym_sinkhorn_knopp`] and yields `left == right`.
pub fn equilibrate_2norm<T: Scalar>(
    a: &SparseMatrix<T>,
    opts: &ExactOptions<T>,
) -> Result<Equilibration<DiagonalScaling<T>, T>> {
    a.require_square()?;
    let b = a.elementwise_square();
    if a.is_symmetric() {
        let eq = sym_sinkhorn_knopp(&b, opts)?;
        let x: Vec<T> = eq.scaling.iter().map(|v| v.sqrt()).collect();
        let s = DiagonalScaling::symmetric(x)?;
        Ok(eq.map(|_| s))
    } else {
        Ok(sinkhorn_knopp(&b, opts)?.map(|s| s.sqrt()))
    }
}

/// Symmetric scaling to unit absolute diagonal: factor `1/sqrt(|a_ii|)`, or
/// exactly one where `a_ii == 0`. Returns the scaling and the scaled matrix.
pub fn jacobi_scale<T: Scalar>(
    a: &SparseMatrix<T>,
) -> Result<(DiagonalScaling<T>, SparseMatrix<T>)> {
    a.require_square()?;
    let d: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|v| {
            if v == T::zero() {
                T::one()
            } else {
                v.abs().sqrt().recip()
            }
        })
        .collect();
    let s = DiagonalScaling::symmetric(d)?;
    let scaled = a.scale(&s)?;
    Ok((s, scaled))
}

/// One pass of infinity-norm scaling: rows to unit max-abs, then columns.
///
/// After the row pass the largest magnitude is one, so the column pass cannot
/// break the row condition and every row and column ends with max-abs one.
pub fn inf_norm_scale<T: Scalar>(a: &SparseMatrix<T>) -> Result<DiagonalScaling<T>> {
    check_no_zero_lines(a)?;
    let row_max: Vec<T> = (0..a.nrows())
        .map(|i| a.row(i).1.iter().fold(T::zero(), |m, v| m.max(v.abs())))
        .collect();
    let left = reciprocal(&row_max, Axis::Row)?;
    let mut col_max = vec![T::zero(); a.ncols()];
    for (i, j, v) in a.iter() {
        col_max[j] = col_max[j].max((left[i] * v).abs());
    }
    let right = reciprocal(&col_max, Axis::Column)?;
    DiagonalScaling::new(left, right)
}
