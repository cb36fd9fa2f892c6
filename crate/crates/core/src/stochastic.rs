//! Matrix-free approximate binormalization.
//!
//! For a signed `A` and `B = A ∘ A`, a Gaussian probe `u` gives an unbiased
//! estimate of `B x` from one product with `A`:
//!
//! ```text
//! E (A X^{1/2} u)² = (A ∘ A) x = B x        (u ~ N(0, I), squares elementwise)
//! ```
//!
//! [`snbin`] drives a Sinkhorn–Knopp-like iteration with these estimates. It
//! keeps the reciprocal scalings `ρ = r⁻¹`, `γ = c⁻¹` and, at iteration `k`,
//! replaces each by a convex combination of its 1-normalized self and the
//! 1-normalized estimate, with weight `ω(k)` from [`OmegaSchedule`]:
//!
//! ```text
//! y = (A diag(γ)^{-1/2} u)²      ρ ← (1-ω) ρ/‖ρ‖₁ + ω y/‖y‖₁
//! z = (Aᵀ diag(ρ)^{-1/2} v)²     γ ← (1-ω) γ/‖γ‖₁ + ω z/‖z‖₁
//! ```
//!
//! and returns `r = ρ^{-1/2}`, `c = γ^{-1/2}`. [`ssbin`] is the symmetric
//! variant with one product per iteration: early on it blends adjacent
//! iterates (fast progress on irreducible problems), then alternates between
//! two interleaved sequences `d`, `dp` (needed for reducible problems), and
//! returns `x = (d · dp)^{-1/4}`.
//!
//! The loop parameters are fixed; there is no merit function and no early
//! exit, so a call costs exactly its product budget.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Axis, Error, Result};
use crate::operator::{DiagonalScaling, LinearOperator};
use crate::scalar::{first_nonpositive, sum, Scalar};

/// Iteration-dependent blending weight
/// `ω(k) = (1 - α)/2 + α/nmv` with `α = (k - 1)/nmv`, `k = 1..=nmv`.
///
/// `ω(1) = 1/2` and `ω` decreases strictly, staying in `(0, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmegaSchedule {
    nmv: usize,
}

impl OmegaSchedule {
    pub fn new(nmv: usize) -> Result<Self> {
        if nmv == 0 {
            return Err(Error::InvalidBudget);
        }
        Ok(Self { nmv })
    }

    pub fn nmv(&self) -> usize {
        self.nmv
    }

    /// Weight for iteration `k` (1-based).
    pub fn omega<T: Scalar>(&self, k: usize) -> T {
        debug_assert!((1..=self.nmv).contains(&k));
        let nmv = T::lit(self.nmv as f64);
        let alpha = T::lit((k - 1) as f64) / nmv;
        let half = T::lit(0.5);
        (T::one() - alpha) * half + alpha / nmv
    }
}

/// Seeded source of iid standard-normal probe vectors.
///
/// The stream is `ChaCha8Rng::seed_from_u64(seed)` sampled with
/// `rand_distr::StandardNormal` as `f64`, one value per component in index
/// order, then converted to the working scalar. Both are portable, so a seed
/// reproduces the same probes on every platform. Unit variance makes the
/// estimator scale factor `E u² = 1`.
#[derive(Debug, Clone)]
pub struct ProbeSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl ProbeSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fill<T: Scalar>(&mut self, out: &mut [T]) {
        for v in out {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            *v = T::lit(z);
        }
    }

    pub fn normal_vector<T: Scalar>(&mut self, n: usize) -> Vec<T> {
        let mut v = vec![T::zero(); n];
        self.fill(&mut v);
        v
    }
}

/// When [`ssbin`] stops blending adjacent iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SwitchRule {
    /// Adjacent iterates while `k < min(32, ⌊nmv/2⌋)`, alternating after.
    #[default]
    Nominal,
    /// Adjacent iterates for the whole run. Plateaus on reducible matrices;
    /// kept for comparison.
    AdjacentOnly,
}

impl SwitchRule {
    /// Iteration after which the alternating mode starts, if ever.
    pub fn switch_iteration(&self, nmv: usize) -> Option<usize> {
        match self {
            SwitchRule::Nominal => Some(32.min(nmv / 2)),
            SwitchRule::AdjacentOnly => None,
        }
    }

    fn adjacent(&self, k: usize, nmv: usize) -> bool {
        match self.switch_iteration(nmv) {
            Some(s) => k < s,
            None => true,
        }
    }
}

/// Internal iterate of a stochastic run, handed to observers after each
/// iteration.
#[derive(Debug, Clone, Copy)]
pub enum StochasticState<'a, T> {
    /// Reciprocal row and column scalings `ρ`, `γ`.
    Nonsymmetric { rho: &'a [T], gamma: &'a [T] },
    /// Current and previous symmetric iterates.
    Symmetric { d: &'a [T], dp: &'a [T] },
}

impl<T: Scalar> StochasticState<'_, T> {
    /// The scaling this iterate stands for.
    pub fn scaling(&self) -> Result<DiagonalScaling<T>> {
        match *self {
            StochasticState::Nonsymmetric { rho, gamma } => {
                DiagonalScaling::new(inv_sqrt(rho), inv_sqrt(gamma))
            }
            StochasticState::Symmetric { d, dp } => DiagonalScaling::symmetric(paired(d, dp)),
        }
    }
}

fn inv_sqrt<T: Scalar>(v: &[T]) -> Vec<T> {
    v.iter().map(|x| x.sqrt().recip()).collect()
}

/// `(d · dp)^{-1/4}`.
fn paired<T: Scalar>(d: &[T], dp: &[T]) -> Vec<T> {
    d.iter()
        .zip(dp)
        .map(|(&a, &b)| (a * b).sqrt().sqrt().recip())
        .collect()
}

/// `s = u / sqrt(w)` for a fresh probe `u`.
fn probe<T: Scalar>(probes: &mut ProbeSource, w: &[T]) -> Vec<T> {
    let mut s = probes.normal_vector::<T>(w.len());
    for (si, &wi) in s.iter_mut().zip(w) {
        *si = *si / wi.sqrt();
    }
    s
}

/// `target ← (1-ω) target/‖target‖₁ + ω y²/‖y²‖₁`.
fn blend<T: Scalar>(target: &mut [T], y: &[T], omega: T, iteration: usize, axis: Axis) -> Result<()> {
    let y2: Vec<T> = y.iter().map(|&v| v * v).collect();
    let ny = sum(&y2);
    if !(ny > T::zero() && ny.is_finite()) {
        return Err(Error::DegenerateProbe { iteration, axis });
    }
    let nt = sum(target);
    let keep = (T::one() - omega) / nt;
    let add = omega / ny;
    for (t, &v) in target.iter_mut().zip(&y2) {
        *t = keep * *t + add * v;
    }
    Ok(())
}

fn require_square<T: Scalar, O: LinearOperator<T> + ?Sized>(a: &O) -> Result<usize> {
    if a.nrows() == a.ncols() {
        Ok(a.nrows())
    } else {
        Err(Error::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        })
    }
}

/// Approximate 2-norm equilibration of a square operator using `nmv` products
/// with `A` and `nmv` with `Aᵀ`.
pub fn snbin<T, O>(a: &O, nmv: usize, probes: &mut ProbeSource) -> Result<DiagonalScaling<T>>
where
    T: Scalar,
    O: LinearOperator<T> + ?Sized,
{
    snbin_observed(a, nmv, probes, |_, _| {})
}

/// [`snbin`], calling `observe(k, state)` after each iteration `k`.
pub fn snbin_observed<T, O, F>(
    a: &O,
    nmv: usize,
    probes: &mut ProbeSource,
    mut observe: F,
) -> Result<DiagonalScaling<T>>
where
    T: Scalar,
    O: LinearOperator<T> + ?Sized,
    F: FnMut(usize, StochasticState<'_, T>),
{
    let schedule = OmegaSchedule::new(nmv)?;
    let n = require_square(a)?;
    let mut rho = vec![T::one(); n];
    let mut gamma = vec![T::one(); n];

    for k in 1..=nmv {
        let omega: T = schedule.omega(k);

        let y = a.apply(&probe(probes, &gamma));
        blend(&mut rho, &y, omega, k, Axis::Row)?;

        let z = a.apply_transpose(&probe(probes, &rho));
        blend(&mut gamma, &z, omega, k, Axis::Column)?;

        observe(
            k,
            StochasticState::Nonsymmetric {
                rho: &rho,
                gamma: &gamma,
            },
        );
    }
    DiagonalScaling::new(inv_sqrt(&rho), inv_sqrt(&gamma))
}

/// Approximate symmetric 2-norm equilibration of a symmetric operator using
/// exactly `nmv` products with `A`. Returns `x` such that `diag(x) A diag(x)`
/// is approximately binormalized.
///
/// Symmetry is assumed, not checked; `apply_transpose` is never called.
pub fn ssbin<T, O>(a: &O, nmv: usize, probes: &mut ProbeSource) -> Result<Vec<T>>
where
    T: Scalar,
    O: LinearOperator<T> + ?Sized,
{
    ssbin_observed(a, nmv, probes, SwitchRule::Nominal, |_, _| {})
}

/// [`ssbin`] with an explicit mode-switch rule.
pub fn ssbin_with_rule<T, O>(
    a: &O,
    nmv: usize,
    probes: &mut ProbeSource,
    rule: SwitchRule,
) -> Result<Vec<T>>
where
    T: Scalar,
    O: LinearOperator<T> + ?Sized,
{
    ssbin_observed(a, nmv, probes, rule, |_, _| {})
}

/// [`ssbin_with_rule`], calling `observe(k, state)` after each iteration `k`.
pub fn ssbin_observed<T, O, F>(
    a: &O,
    nmv: usize,
    probes: &mut ProbeSource,
    rule: SwitchRule,
    mut observe: F,
) -> Result<Vec<T>>
where
    T: Scalar,
    O: LinearOperator<T> + ?Sized,
    F: FnMut(usize, StochasticState<'_, T>),
{
    let schedule = OmegaSchedule::new(nmv)?;
    let n = require_square(a)?;
    let mut d = vec![T::one(); n];
    let mut dp = d.clone();

    for k in 1..=nmv {
        let y = a.apply(&probe(probes, &dp));
        blend(&mut d, &y, schedule.omega(k), k, Axis::Row)?;
        if rule.adjacent(k, nmv) {
            dp.copy_from_slice(&d);
        } else {
            std::mem::swap(&mut d, &mut dp);
        }
        observe(k, StochasticState::Symmetric { d: &d, dp: &dp });
    }
    let x = paired(&d, &dp);
    if let Some(index) = first_nonpositive(&x) {
        return Err(Error::NonPositiveScaling { index });
    }
    Ok(x)
}

/// Sample mean of `(A diag(x)^{1/2} u)²` over `nsamples` probes, an unbiased
/// estimate of `(A ∘ A) x`.
pub fn estimate_bx<T, O>(
    a: &O,
    x: &[T],
    probes: &mut ProbeSource,
    nsamples: usize,
) -> Result<Vec<T>>
where
    T: Scalar,
    O: LinearOperator<T> + ?Sized,
{
    if x.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: x.len(),
        });
    }
    if let Some(index) = first_nonpositive(x) {
        return Err(Error::NonPositiveScaling { index });
    }
    if nsamples == 0 {
        return Err(Error::InvalidBudget);
    }
    let sqrt_x: Vec<T> = x.iter().map(|v| v.sqrt()).collect();
    let mut acc = vec![T::zero(); a.nrows()];
    let mut s = vec![T::zero(); x.len()];
    for _ in 0..nsamples {
        probes.fill(&mut s);
        for (si, &w) in s.iter_mut().zip(&sqrt_x) {
            *si = *si * w;
        }
        for (t, v) in acc.iter_mut().zip(a.apply(&s)) {
            *t = *t + v * v;
        }
    }
    let inv = T::lit(nsamples as f64).recip();
    Ok(acc.into_iter().map(|v| v * inv).collect())
}

/// Variant that blends the scalings `r`, `c` themselves with reciprocals of
/// the estimates, instead of blending `ρ`, `γ` with the estimates. Taking the
/// reciprocal of a single noisy sample makes it unstable; it exists only to
/// compare against [`snbin`].
#[cfg(any(test, feature = "testbench"))]
pub mod testbench {
    use super::*;

    fn blend_reciprocal<T: Scalar>(
        target: &mut [T],
        y: &[T],
        omega: T,
        iteration: usize,
        axis: Axis,
    ) -> Result<()> {
        if y.iter().any(|&v| v == T::zero()) {
            return Err(Error::DegenerateProbe { iteration, axis });
        }
        let inv: Vec<T> = y.iter().map(|&v| (v * v).recip()).collect();
        let ni = sum(&inv);
        if !ni.is_finite() {
            return Err(Error::DegenerateProbe { iteration, axis });
        }
        let keep = (T::one() - omega) / sum(target);
        let add = omega / ni;
        for (t, &v) in target.iter_mut().zip(&inv) {
            *t = keep * *t + add * v;
        }
        Ok(())
    }

    pub fn snbin_reciprocal_blend<T, O>(
        a: &O,
        nmv: usize,
        probes: &mut ProbeSource,
    ) -> Result<DiagonalScaling<T>>
    where
        T: Scalar,
        O: LinearOperator<T> + ?Sized,
    {
        let schedule = OmegaSchedule::new(nmv)?;
        let n = require_square(a)?;
        // r and c hold the squared 2-norm scalings directly
        let mut r = vec![T::one(); n];
        let mut c = vec![T::one(); n];
        for k in 1..=nmv {
            let omega: T = schedule.omega(k);
            let s: Vec<T> = probes
                .normal_vector::<T>(n)
                .into_iter()
                .zip(&c)
                .map(|(u, &ci)| u * ci.sqrt())
                .collect();
            blend_reciprocal(&mut r, &a.apply(&s), omega, k, Axis::Row)?;
            let s: Vec<T> = probes
                .normal_vector::<T>(n)
                .into_iter()
                .zip(&r)
                .map(|(u, &ri)| u * ri.sqrt())
                .collect();
            blend_reciprocal(&mut c, &a.apply_transpose(&s), omega, k, Axis::Column)?;
        }
        DiagonalScaling::new(
            r.iter().map(|v| v.sqrt()).collect(),
            c.iter().map(|v| v.sqrt()).collect(),
        )
    }
}
