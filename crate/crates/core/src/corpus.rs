//! Reproducible test matrices.
//!
//! Every family is built with a nonzero diagonal (up to a row permutation) on
//! top of a pattern that forces total support, and the result is checked with
//! [`has_total_support`] before it is returned. All families finish with a
//! random diagonal scaling whose log10 factors span `spread` decades, which is
//! what makes the matrices badly scaled.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::SparseMatrix;
use crate::structure::has_total_support;

pub const MAX_ATTEMPTS: usize = 20;
pub const DEFAULT_SPREAD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Spd,
    SymmetricIndefinite,
    NonsymmetricGeneral,
    ReducibleBlocks,
    PermutationPlusNoise,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Spd,
        Family::SymmetricIndefinite,
        Family::NonsymmetricGeneral,
        Family::ReducibleBlocks,
        Family::PermutationPlusNoise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Spd => "spd",
            Family::SymmetricIndefinite => "symmetric_indefinite",
            Family::NonsymmetricGeneral => "nonsymmetric_general",
            Family::ReducibleBlocks => "reducible_blocks",
            Family::PermutationPlusNoise => "permutation_plus_noise",
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, Family::Spd | Family::SymmetricIndefinite | Family::ReducibleBlocks)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown matrix family `{s}`")))
    }
}

/// Parameters of one generated matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub family: Family,
    pub n: usize,
    /// Probability that an off-diagonal entry (or symmetric pair) is present.
    pub density: f64,
    /// Condition number of the matrix before the final diagonal scaling.
    /// Setting it switches to a dense `U Σ Vᵀ` construction.
    pub cond_target: Option<f64>,
    pub seed: u64,
    /// Block sizes for [`Family::ReducibleBlocks`]; empty means two halves.
    pub blocks: Vec<usize>,
    /// Width in decades of the random diagonal scaling.
    pub spread: f64,
    pub name: Option<String>,
}

impl CorpusSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            density: (8.0 / n.max(1) as f64).min(1.0),
            cond_target: None,
            seed,
            blocks: Vec::new(),
            spread: DEFAULT_SPREAD,
            name: None,
        }
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn with_cond_target(mut self, cond: f64) -> Self {
        self.cond_target = Some(cond);
        self
    }

    pub fn with_blocks(mut self, blocks: Vec<usize>) -> Self {
        self.blocks = blocks;
        self
    }

    pub fn with_spread(mut self, spread: f64) -> Self {
        self.spread = spread;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => format!("{}_n{}_s{}", self.family, self.n, self.seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density {} outside (0, 1]", self.density));
        }
        if let Some(c) = self.cond_target {
            if !(c >= 1.0 && c.is_finite()) {
                return bad(format!("cond_target {c} must be a finite value >= 1"));
            }
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return bad(format!("spread {} must be finite and nonnegative", self.spread));
        }
        if self.family == Family::ReducibleBlocks {
            let blocks = self.block_sizes();
            if blocks.len() < 2 || blocks.contains(&0) {
                return bad("reducible_blocks needs at least two nonempty blocks".into());
            }
            if blocks.iter().sum::<usize>() != self.n {
                return bad(format!("block sizes {blocks:?} do not sum to n = {}", self.n));
            }
        } else if !self.blocks.is_empty() {
            return bad(format!("blocks only apply to reducible_blocks, not {}", self.family));
        }
        Ok(())
    }

    fn block_sizes(&self) -> Vec<usize> {
        if self.blocks.is_empty() {
            vec![self.n / 2, self.n - self.n / 2]
        } else {
            self.blocks.clone()
        }
    }
}

impl FromStr for CorpusSpec {
    type Err = Error;

    /// Parses whitespace-separated `key=value` pairs, e.g.
    /// `family=spd n=50 seed=1 cond=1e6`.
    fn from_str(line: &str) -> Result<Self> {
        let mut family = None;
        let mut n = None;
        let mut seed = 0;
        let mut density = None;
        let mut cond_target = None;
        let mut blocks = Vec::new();
        let mut spread = DEFAULT_SPREAD;
        let mut name = None;
        for pair in line.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{pair}`")))?;
            match k {
                "family" => family = Some(v.parse()?),
                "n" => n = Some(config_value(k, v)?),
                "seed" => seed = config_value(k, v)?,
                "density" => density = Some(config_value(k, v)?),
                "cond" | "cond_target" => cond_target = Some(config_value(k, v)?),
                "blocks" => {
                    blocks = v
                        .split(',')
                        .map(|b| config_value(k, b))
                        .collect::<Result<_>>()?
                }
                "spread" => spread = config_value(k, v)?,
                "name" => name = Some(v.to_string()),
                _ => return Err(Error::Config(format!("unknown corpus key `{k}`"))),
            }
        }
        let family = family.ok_or_else(|| Error::Config("corpus spec needs `family`".into()))?;
        let n: usize = match (n, blocks.is_empty()) {
            (Some(n), _) => n,
            (None, false) => blocks.iter().sum(),
            (None, true) => return Err(Error::Config("corpus spec needs `n`".into())),
        };
        let mut spec = CorpusSpec::new(family, n, seed);
        if let Some(d) = density {
            spec.density = d;
        }
        spec.cond_target = cond_target;
        spec.blocks = blocks;
        spec.spread = spread;
        spec.name = name;
        spec.validate()?;
        Ok(spec)
    }
}

pub(crate) fn config_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
}

/// One spec per non-empty line; `#` starts a comment.
pub fn parse_corpus_specs(text: &str) -> Result<Vec<CorpusSpec>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

pub fn read_corpus_specs(path: impl AsRef<Path>) -> Result<Vec<CorpusSpec>> {
    parse_corpus_specs(&fs::read_to_string(path)?)
}

/// Builds the matrix described by `spec`. The same spec always yields the
/// same matrix, bit for bit.
pub fn generate(spec: &CorpusSpec) -> Result<SparseMatrix<f64>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut reason = String::new();
    for _ in 0..MAX_ATTEMPTS {
        match attempt(spec, &mut rng) {
            Ok(m) if has_total_support(&m) => return Ok(m),
            Ok(_) => reason = "pattern lacks total support".into(),
            Err(r) => reason = r,
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
        reason,
    })
}

type Triplets = Vec<(usize, usize, f64)>;

fn attempt(spec: &CorpusSpec, rng: &mut ChaCha8Rng) -> std::result::Result<SparseMatrix<f64>, String> {
    let n = spec.n;
    let m = match spec.family {
        Family::Spd => {
            let core = match spec.cond_target {
                Some(c) => dense_symmetric(n, c, false, rng),
                None => sparse_spd(n, spec.density, rng),
            };
            let d = log_uniform(n, spec.spread, rng);
            let m = build(n, n, scale_triplets(core, &d, &d))?;
            if !cholesky_succeeds(&m) {
                return Err("matrix is not numerically positive definite".into());
            }
            m
        }
        Family::SymmetricIndefinite => {
            let core = match spec.cond_target {
                Some(c) => dense_symmetric(n, c, true, rng),
                None => sparse_symmetric(n, spec.density, true, rng),
            };
            let d = log_uniform(n, spec.spread, rng);
            build(n, n, scale_triplets(core, &d, &d))?
        }
        Family::NonsymmetricGeneral => {
            let core = match spec.cond_target {
                Some(c) => dense_general(n, c, rng),
                None => sparse_cyclic(n, spec.density, rng),
            };
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            let core = core.into_iter().map(|(i, j, v)| (perm[i], j, v)).collect();
            let dr = log_uniform(n, spec.spread, rng);
            let dc = log_uniform(n, spec.spread, rng);
            build(n, n, scale_triplets(core, &dr, &dc))?
        }
        Family::ReducibleBlocks => {
            let blocks = spec.block_sizes();
            let mut entries = Vec::new();
            let mut offset = 0;
            for (b, &size) in blocks.iter().enumerate() {
                // block magnitudes are spaced evenly across the spread
                let level = if blocks.len() > 1 {
                    spec.spread * (b as f64 / (blocks.len() - 1) as f64 - 0.5)
                } else {
                    0.0
                };
                let mag = 10f64.powf(level);
                let core = match spec.cond_target {
                    Some(c) => dense_symmetric(size, c, true, rng),
                    None => sparse_symmetric(size, spec.density, true, rng),
                };
                entries.extend(core.into_iter().map(|(i, j, v)| (i + offset, j + offset, v * mag)));
                offset += size;
            }
            build(n, n, entries)?
        }
        Family::PermutationPlusNoise => {
            let d = log_uniform(n, spec.spread, rng);
            let mut entries: Triplets = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
            let eps = 1e-2;
            for (i, j, v) in sparse_symmetric(n, spec.density, true, rng) {
                if i != j {
                    entries.push((i, j, eps * v * (d[i] * d[j]).sqrt()));
                }
            }
            let mut perm: Vec<usize> = (0..n).collect();
            // the identity would leave the matrix symmetric
            while n > 1 && perm.iter().enumerate().all(|(i, &p)| i == p) {
                perm.shuffle(rng);
            }
            build(n, n, entries.into_iter().map(|(i, j, v)| (perm[i], j, v)))?
        }
    };
    Ok(m)
}

fn build(
    nrows: usize,
    ncols: usize,
    entries: impl IntoIterator<Item = (usize, usize, f64)>,
) -> std::result::Result<SparseMatrix<f64>, String> {
    SparseMatrix::from_triplets(nrows, ncols, entries).map_err(|e| e.to_string())
}

fn scale_triplets(t: Triplets, left: &[f64], right: &[f64]) -> Triplets {
    t.into_iter()
        .map(|(i, j, v)| (i, j, v * (left[i] * right[j])))
        .collect()
}

/// Factors `10^u` with `u` uniform on `[-spread/2, spread/2]`.
fn log_uniform(n: usize, spread: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| 10f64.powf(spread * (rng.random::<f64>() - 0.5)))
        .collect()
}

/// Signed value bounded away from zero.
fn signed(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.random_range(0.1..1.0);
    if rng.random::<bool>() {
        m
    } else {
        -m
    }
}

/// Symmetric pattern with a full diagonal. With `indefinite`, diagonal signs
/// are mixed and both signs are present once `n >= 2`.
fn sparse_symmetric(n: usize, density: f64, indefinite: bool, rng: &mut ChaCha8Rng) -> Triplets {
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..i {
            if rng.random::<f64>() < density {
                let v = signed(rng);
                t.push((i, j, v));
                t.push((j, i, v));
            }
        }
    }
    for i in 0..n {
        let mut v = signed(rng);
        if indefinite && n >= 2 && i < 2 {
            v = if i == 0 { v.abs() } else { -v.abs() };
        } else if !indefinite {
            v = v.abs();
        }
        t.push((i, i, v));
    }
    t
}

/// Strictly diagonally dominant symmetric matrix with positive diagonal.
fn sparse_spd(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Triplets {
    let mut t = sparse_symmetric(n, density, false, rng);
    let mut row_abs = vec![0.0; n];
    for &(i, j, v) in &t {
        if i != j {
            row_abs[i] += v.abs();
        }
    }
    for e in t.iter_mut() {
        if e.0 == e.1 {
            e.2 = row_abs[e.0] + rng.random_range(0.1..1.0);
        }
    }
    t
}

/// Full diagonal plus a Hamiltonian cycle plus random entries. A full
/// diagonal on a strongly connected pattern is fully indecomposable.
fn sparse_cyclic(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Triplets {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, signed(rng)));
    }
    if n > 1 {
        for k in 0..n {
            t.push((order[k], order[(k + 1) % n], signed(rng)));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < density {
                t.push((i, j, signed(rng)));
            }
        }
    }
    t
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed orthogonal matrix from the QR factors of a Gaussian.
fn orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Singular values spaced geometrically from 1 down to `1/cond`.
fn singular_values(n: usize, cond: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|k| cond.powf(-(k as f64) / (n - 1) as f64))
        .collect()
}

fn dense_triplets(m: &DMatrix<f64>) -> Triplets {
    let mut t = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            t.push((i, j, m[(i, j)]));
        }
    }
    t
}

fn dense_symmetric(n: usize, cond: f64, indefinite: bool, rng: &mut ChaCha8Rng) -> Triplets {
    let u = orthogonal(n, rng);
    let mut s = singular_values(n, cond);
    if indefinite && n >= 2 {
        for (k, v) in s.iter_mut().enumerate() {
            // keep both signs present regardless of the draw
            if k == 1 || (k > 1 && rng.random::<bool>()) {
                *v = -*v;
            }
        }
    }
    let mut m = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s)) * u.transpose();
    // enforce exact symmetry after rounding
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    dense_triplets(&m)
}

fn dense_general(n: usize, cond: f64, rng: &mut ChaCha8Rng) -> Triplets {
    let u = orthogonal(n, rng);
    let v = orthogonal(n, rng);
    let s = nalgebra::DVector::from_vec(singular_values(n, cond));
    dense_triplets(&(u * DMatrix::from_diagonal(&s) * v.transpose()))
}

/// Dense Cholesky factorization succeeds, which certifies that every
/// leading principal minor is positive.
pub fn cholesky_succeeds(m: &SparseMatrix<f64>) -> bool {
    if !m.is_square() || !m.is_symmetric() {
        return false;
    }
    let n = m.nrows();
    let mut d = DMatrix::zeros(n, n);
    for (i, j, v) in m.iter() {
        d[(i, j)] = v;
    }
    d.cholesky().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::condition_number;
    use crate::structure::{has_support, is_irreducible};
    use proptest::prelude::*;

    fn leading_minors_positive(m: &SparseMatrix<f64>) -> bool {
        // independent check via determinants of the leading blocks
        let n = m.nrows();
        let mut d = DMatrix::zeros(n, n);
        for (i, j, v) in m.iter() {
            d[(i, j)] = v;
        }
        (1..=n).all(|k| d.view((0, 0), (k, k)).clone_owned().lu().determinant() > 0.0)
    }

    #[test]
    fn spd_family() {
        let m = generate(&CorpusSpec::new(Family::Spd, 50, 1).with_spread(0.5)).unwrap();
        assert!(m.is_symmetric());
        assert!(cholesky_succeeds(&m));
        assert!(leading_minors_positive(&m));
        let dense = generate(&CorpusSpec::new(Family::Spd, 30, 2).with_cond_target(1e4)).unwrap();
        assert!(dense.is_symmetric() && cholesky_succeeds(&dense));
        assert_eq!(dense.nnz(), 900);
    }

    #[test]
    fn cond_target_is_met_without_spread() {
        for family in [Family::Spd, Family::SymmetricIndefinite, Family::NonsymmetricGeneral] {
            let spec = CorpusSpec::new(family, 40, 5).with_cond_target(1e5).with_spread(0.0);
            let k = condition_number(&generate(&spec).unwrap(), 100).unwrap();
            assert!((k / 1e5 - 1.0).abs() < 1e-6, "{family}: {k}");
        }
    }

    #[test]
    fn reducible_family() {
        let m = generate(&CorpusSpec::new(Family::ReducibleBlocks, 5, 3).with_blocks(vec![2, 3])).unwrap();
        assert!(!is_irreducible(&m));
        assert!(m.is_symmetric());
        for (i, j, _) in m.iter() {
            assert_eq!(i < 2, j < 2);
        }
    }

    #[test]
    fn nonsymmetric_sparse_has_support() {
        let m = generate(&CorpusSpec::new(Family::NonsymmetricGeneral, 100, 4).with_density(0.1)).unwrap();
        assert!(has_support(&m));
        assert!(is_irreducible(&m));
        assert!(!m.is_symmetric());
    }

    #[test]
    fn permutation_plus_noise_is_scalable() {
        let m = generate(&CorpusSpec::new(Family::PermutationPlusNoise, 60, 9).with_density(0.05)).unwrap();
        assert!(has_total_support(&m));
        assert!(!m.is_symmetric());
    }

    #[test]
    fn indefinite_family_has_both_signs() {
        for spec in [
            CorpusSpec::new(Family::SymmetricIndefinite, 30, 1),
            CorpusSpec::new(Family::SymmetricIndefinite, 20, 1).with_cond_target(100.0),
        ] {
            let m = generate(&spec).unwrap();
            assert!(m.is_symmetric());
            assert!(!cholesky_succeeds(&m));
            assert!(!cholesky_succeeds(&m.map_values(|v| -v)));
        }
    }

    #[test]
    fn hopeless_spd_target_fails_after_retries() {
        let spec = CorpusSpec::new(Family::Spd, 30, 0).with_cond_target(1e40).with_spread(0.0);
        match generate(&spec) {
            Err(Error::GenerationFailed { attempts, .. }) => assert_eq!(attempts, MAX_ATTEMPTS),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_specs_are_config_errors() {
        for bad in [
            CorpusSpec::new(Family::Spd, 0, 0),
            CorpusSpec::new(Family::Spd, 5, 0).with_density(0.0),
            CorpusSpec::new(Family::Spd, 5, 0).with_cond_target(0.5),
            CorpusSpec::new(Family::ReducibleBlocks, 5, 0).with_blocks(vec![2, 2]),
            CorpusSpec::new(Family::ReducibleBlocks, 5, 0).with_blocks(vec![5]),
            CorpusSpec::new(Family::Spd, 5, 0).with_blocks(vec![2, 3]),
        ] {
            assert!(matches!(generate(&bad), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn spec_lines() {
        let specs = parse_corpus_specs(
            "# corpus\nfamily=spd n=50 seed=1 cond=1e6\n\nfamily=reducible_blocks blocks=2,3 seed=4 name=rb # tail\n",
        )
        .unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].cond_target, Some(1e6));
        assert_eq!(specs[0].name(), "spd_n50_s1");
        assert_eq!(specs[1].n, 5);
        assert_eq!(specs[1].blocks, vec![2, 3]);
        assert_eq!(specs[1].name(), "rb");
        for bad in ["n=5", "family=spd", "family=circle n=5", "family=spd n=5 color=red", "family=spd n=x", "family=spd n5"] {
            assert!(bad.parse::<CorpusSpec>().is_err(), "{bad}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generation_is_deterministic_and_scalable(
            fam in 0usize..5,
            n in 2usize..40,
            seed in any::<u64>(),
            density in 0.01f64..0.5,
            dense in any::<bool>(),
        ) {
            let family = Family::ALL[fam];
            let mut spec = CorpusSpec::new(family, n, seed).with_density(density);
            if dense && family != Family::PermutationPlusNoise {
                spec = spec.with_cond_target(1e3);
            }
            let a = generate(&spec).unwrap();
            let b = generate(&spec).unwrap();
            let bits = |m: &SparseMatrix<f64>| m.iter().map(|(i, j, v)| (i, j, v.to_bits())).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
            prop_assert!(has_total_support(&a));
            prop_assert_eq!(a.is_symmetric(), family.is_symmetric());
        }
    }
}
