//! Quality metrics for scaled matrices.
//!
//! The headline metric is the *ratio*: largest over smallest row 2-norm, or
//! for a nonsymmetric matrix the larger of the row and column versions. It is
//! 1 exactly when the matrix is binormalized.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};
use crate::exact::SymmetricSinkhornKnopp;
use crate::operator::{DiagonalScaling, SparseMatrix};
use crate::scalar::Scalar;
use crate::stochastic::{snbin_observed, ssbin_observed, ProbeSource, SwitchRule};

/// Largest matrix order for which [`condition_number`] densifies by default.
pub const DEFAULT_COND_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioSide {
    Rows,
    Cols,
    MaxOfBoth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioMetric<T> {
    pub value: T,
    pub side: RatioSide,
}

fn spread<T: Scalar>(norms_sq: &[T], axis: Axis) -> Result<T> {
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for (index, &v) in norms_sq.iter().enumerate() {
        if v == T::zero() {
            return Err(Error::ZeroRowOrColumn { axis, index });
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((hi / lo).sqrt())
}

pub fn row_ratio<T: Scalar>(m: &SparseMatrix<T>) -> Result<RatioMetric<T>> {
    Ok(RatioMetric {
        value: spread(&m.row_norms_sq(), Axis::Row)?,
        side: RatioSide::Rows,
    })
}

pub fn col_ratio<T: Scalar>(m: &SparseMatrix<T>) -> Result<RatioMetric<T>> {
    Ok(RatioMetric {
        value: spread(&m.col_norms_sq(), Axis::Column)?,
        side: RatioSide::Cols,
    })
}

/// The larger of the row and column 2-norm ratios. For a symmetric matrix both
/// coincide.
pub fn ratio<T: Scalar>(m: &SparseMatrix<T>) -> Result<RatioMetric<T>> {
    let r = row_ratio(m)?.value;
    let c = col_ratio(m)?.value;
    Ok(RatioMetric {
        value: r.max(c),
        side: RatioSide::MaxOfBoth,
    })
}

/// [`ratio`] of `diag(left) A diag(right)` without forming it; `b` is `A ∘ A`.
pub fn scaled_ratio<T: Scalar>(b: &SparseMatrix<T>, s: &DiagonalScaling<T>) -> Result<T> {
    let l2: Vec<T> = s.left().iter().map(|&v| v * v).collect();
    let r2: Vec<T> = s.right().iter().map(|&v| v * v).collect();
    let rows: Vec<T> = b.matvec(&r2).iter().zip(&l2).map(|(&x, &w)| x * w).collect();
    let cols: Vec<T> = b
        .matvec_transpose(&l2)
        .iter()
        .zip(&r2)
        .map(|(&x, &w)| x * w)
        .collect();
    Ok(spread(&rows, Axis::Row)?.max(spread(&cols, Axis::Column)?))
}

/// 2-norm condition number `σ_max / σ_min` from a dense SVD.
pub fn condition_number<T: Scalar>(m: &SparseMatrix<T>, cap: usize) -> Result<f64> {
    let n = m.require_square()?;
    if n > cap {
        return Err(Error::SizeCapExceeded { n, cap });
    }
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in m.iter() {
        dense[(i, j)] = v.as_f64();
    }
    let sv = dense.singular_values();
    let sigma_max = sv.max();
    let sigma_min = sv.min();
    if !(sigma_min > sigma_max * f64::EPSILON * n as f64) {
        return Err(Error::SingularMatrix {
            sigma_max,
            sigma_min,
        });
    }
    Ok(sigma_max / sigma_min)
}

/// Population variance of `s = (m ∘ m) e`, the squared row 2-norms.
pub fn row_sum_variance<T: Scalar>(m: &SparseMatrix<T>) -> Result<T> {
    let n = m.require_square()?;
    let s = m.row_norms_sq();
    let nn = T::lit(n as f64);
    let mean = s.iter().copied().sum::<T>() / nn;
    Ok(s.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nn)
}

/// Algorithms whose per-iteration progress [`convergence_history`] can trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryAlgorithm {
    Snbin,
    /// `snbin` on a symmetric matrix, symmetrized as `sqrt(r c)`.
    SnbinSymmetric,
    Ssbin,
    /// `ssbin` that never switches to alternating iterates.
    SsbinNoSwitch,
    /// Exact Sinkhorn–Knopp on `A ∘ A`; `iters` bounds the iteration count.
    SinkhornKnopp,
    /// Exact symmetric Sinkhorn–Knopp on `A ∘ A`.
    SymSinkhornKnopp,
}

/// `log10` ratio of `a` scaled by each successive iterate.
///
/// Entry 0 is the unscaled matrix; entry `k` follows iteration `k`. The
/// stochastic algorithms run exactly `iters` iterations with probes seeded by
/// `seed`; the exact ones stop early once the ratio is within 1e-12 of one.
pub fn convergence_history<T: Scalar>(
    a: &SparseMatrix<T>,
    algorithm: HistoryAlgorithm,
    iters: usize,
    seed: u64,
) -> Result<Vec<T>> {
    let b = a.elementwise_square();
    let n = a.require_square()?;
    let mut out = vec![ratio(a)?.value.log10()];
    let mut failure: Option<Error> = None;
    let mut record = |s: Result<DiagonalScaling<T>>, out: &mut Vec<T>| match s
        .and_then(|s| scaled_ratio(&b, &s))
    {
        Ok(r) => out.push(r.log10()),
        Err(e) => {
            failure.get_or_insert(e);
        }
    };
    let mut probes = ProbeSource::new(seed);

    match algorithm {
        HistoryAlgorithm::Snbin => {
            snbin_observed(a, iters, &mut probes, |_, st| record(st.scaling(), &mut out))?;
        }
        HistoryAlgorithm::SnbinSymmetric => {
            snbin_observed(a, iters, &mut probes, |_, st| {
                let sym = st
                    .scaling()
                    .and_then(|s| s.geometric_mean())
                    .and_then(DiagonalScaling::symmetric);
                record(sym, &mut out)
            })?;
        }
        HistoryAlgorithm::Ssbin | HistoryAlgorithm::SsbinNoSwitch => {
            let rule = if algorithm == HistoryAlgorithm::Ssbin {
                SwitchRule::Nominal
            } else {
                SwitchRule::AdjacentOnly
            };
            ssbin_observed(a, iters, &mut probes, rule, |_, st| {
                record(st.scaling(), &mut out)
            })?;
        }
        HistoryAlgorithm::SinkhornKnopp => {
            let mut c = vec![T::one(); n];
            for _ in 0..iters {
                let r = recip(&b.matvec(&c), Axis::Row)?;
                c = recip(&b.matvec_transpose(&r), Axis::Column)?;
                let s = DiagonalScaling::new(r, c.clone()).map(|s| s.sqrt());
                record(s, &mut out);
                if done(&out) {
                    break;
                }
            }
        }
        HistoryAlgorithm::SymSinkhornKnopp => {
            let mut it = SymmetricSinkhornKnopp::new(&b, vec![T::one(); n])?;
            for _ in 0..iters {
                it.step()?;
                let x: Vec<T> = it.x().iter().map(|v| v.sqrt()).collect();
                record(DiagonalScaling::symmetric(x), &mut out);
                if done(&out) {
                    break;
                }
            }
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn recip<T: Scalar>(v: &[T], axis: Axis) -> Result<Vec<T>> {
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

fn done<T: Scalar>(h: &[T]) -> bool {
    h.last().is_some_and(|&v| v < T::lit(1e-12f64.ln_1p() / std::f64::consts::LN_10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{equilibrate_2norm, ExactOptions};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dense(n: usize, seed: u64) -> SparseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        SparseMatrix::from_rows(&rows).unwrap()
    }

    /// One-sided Jacobi SVD: orthogonalize columns pairwise until converged,
    /// then the column norms are the singular values.
    fn jacobi_singular_values(m: &SparseMatrix<f64>) -> Vec<f64> {
        let n = m.ncols();
        let mut cols: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..m.nrows()).map(|i| m.get(i, j)).collect())
            .collect();
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                    let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                    let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                    if gamma == 0.0 {
                        continue;
                    }
                    off = off.max(gamma.abs() / (alpha * beta).sqrt());
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..m.nrows() {
                        let (x, y) = (cols[p][i], cols[q][i]);
                        cols[p][i] = c * x - s * y;
                        cols[q][i] = s * x + c * y;
                    }
                }
            }
            if off < 1e-15 {
                break;
            }
        }
        cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect()
    }

    #[test]
    fn ratio_examples() {
        let id = SparseMatrix::<f64>::identity(5);
        assert_eq!(ratio(&id).unwrap().value, 1.0);
        let d = SparseMatrix::from_diagonal(&[1.0, 2.0]);
        assert_eq!(ratio(&d).unwrap().value, 2.0);
        assert_eq!(ratio(&d).unwrap().side, RatioSide::MaxOfBoth);

        // rows balanced, columns not
        let a = SparseMatrix::from_rows(&[vec![3.0, 4.0], vec![5.0, 0.0]]).unwrap();
        assert_eq!(row_ratio(&a).unwrap().value, 1.0);
        let c = col_ratio(&a).unwrap().value;
        assert!((c - (34f64).sqrt() / 4.0).abs() < 1e-15);
        assert_eq!(ratio(&a).unwrap().value, c);

        let z = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert!(matches!(
            ratio(&z),
            Err(Error::ZeroRowOrColumn { axis: Axis::Row, index: 1 })
        ));
    }

    #[test]
    fn ratio_of_equilibrated_is_one() {
        let a = random_dense(12, 4);
        let eq = equilibrate_2norm(&a, &ExactOptions::default()).unwrap();
        let r = ratio(&a.scale(&eq.scaling).unwrap()).unwrap().value;
        assert!((r - 1.0).abs() < 1e-8);
        let b = a.elementwise_square();
        assert!((scaled_ratio(&b, &eq.scaling).unwrap() - r).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn ratio_invariant_under_uniform_scaling(seed in any::<u64>(), alpha in 1e-3f64..1e3) {
            let a = random_dense(6, seed);
            let r1 = ratio(&a).unwrap().value;
            let r2 = ratio(&a.map_values(|v| alpha * v)).unwrap().value;
            prop_assert!((r1 - r2).abs() <= 1e-12 * r1);
            prop_assert!(r1 >= 1.0);
        }
    }

    #[test]
    fn condition_number_examples() {
        let id = SparseMatrix::<f64>::identity(4);
        assert!((condition_number(&id, 10).unwrap() - 1.0).abs() < 1e-14);
        let d = SparseMatrix::from_diagonal(&[1.0, 10.0]);
        assert!((condition_number(&d, 10).unwrap() - 10.0).abs() < 1e-13);
        assert!(matches!(
            condition_number(&id, 3),
            Err(Error::SizeCapExceeded { n: 4, cap: 3 })
        ));
        let sing = SparseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            condition_number(&sing, 10),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn condition_number_matches_jacobi_svd_oracle() {
        for seed in 0..3 {
            let a = random_dense(20, seed);
            let sv = jacobi_singular_values(&a);
            let hi = sv.iter().copied().fold(0.0, f64::max);
            let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
            let k = condition_number(&a, DEFAULT_COND_CAP).unwrap();
            assert!(((k - hi / lo) / k).abs() < 1e-8, "{k} vs {}", hi / lo);
        }
    }

    #[test]
    fn variance_examples() {
        let d = SparseMatrix::from_diagonal(&[1.0, 2.0]);
        assert_eq!(row_sum_variance(&d).unwrap(), 2.25);
        assert_eq!(row_sum_variance(&SparseMatrix::<f64>::identity(3)).unwrap(), 0.0);
        let a = random_dense(10, 8);
        let eq = equilibrate_2norm(&a, &ExactOptions::default()).unwrap();
        assert!(row_sum_variance(&a.scale(&eq.scaling).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn history_starts_at_unscaled_ratio() {
        let a = random_dense(15, 2);
        let r0 = ratio(&a).unwrap().value.log10();
        for alg in [
            HistoryAlgorithm::Snbin,
            HistoryAlgorithm::SinkhornKnopp,
        ] {
            let h = convergence_history(&a, alg, 20, 1).unwrap();
            assert_eq!(h[0], r0);
        }
        let s = crate::operator::SparseMatrix::from_triplets(
            15,
            15,
            a.iter()
                .chain(a.transpose().iter())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        for alg in [
            HistoryAlgorithm::Ssbin,
            HistoryAlgorithm::SsbinNoSwitch,
            HistoryAlgorithm::SnbinSymmetric,
            HistoryAlgorithm::SymSinkhornKnopp,
        ] {
            let h = convergence_history(&s, alg, 20, 1).unwrap();
            assert_eq!(h[0], ratio(&s).unwrap().value.log10());
        }
        let h = convergence_history(&s, HistoryAlgorithm::Ssbin, 20, 1).unwrap();
        assert_eq!(h.len(), 21);
    }

    #[test]
    fn exact_history_trends_down() {
        let a = random_dense(10, 6);
        let h = convergence_history(&a, HistoryAlgorithm::SinkhornKnopp, 5000, 0).unwrap();
        assert!(*h.last().unwrap() < 1e-10);
        assert!(h.last().unwrap() < &h[0]);
        assert!(h.len() < 5001);
    }
}
