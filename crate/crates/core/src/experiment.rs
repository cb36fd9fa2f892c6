//! Batch experiments: every applicable (matrix, algorithm, budget, seed) cell
//! becomes one [`RunReport`].
//!
//! Configuration is a plain-text file of `key = value` lines:
//!
//! ```text
//! # inputs may repeat
//! input = matrices/bcsstk01.mtx
//! corpus = family=spd n=200 seed=1 cond=1e6
//! corpus_file = more_specs.txt
//! algorithms = ssbin, snbin, sk_exact
//! budgets = 32, 64, 128
//! seeds = 5
//! cond_cap = 2000
//! format = csv
//! out = report.csv
//! threads = 4
//! ```

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{config_value, generate, parse_corpus_specs, CorpusSpec};
use crate::diagnostics::{
    condition_number, convergence_history, ratio, HistoryAlgorithm, DEFAULT_COND_CAP,
};
use crate::error::{Error, Result};
use crate::exact::{
    inf_norm_scale, jacobi_scale, sinkhorn_knopp, sym_sinkhorn_knopp, ExactOptions,
};
use crate::io::{read_matrix_market, ReportFormat, RunReport, STATUS_OK};
use crate::operator::{DiagonalScaling, SparseMatrix};
use crate::stochastic::{snbin, ssbin, ProbeSource};

pub const DEFAULT_BUDGETS: [usize; 3] = [32, 64, 128];
pub const DEFAULT_SEEDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Snbin,
    Ssbin,
    SkExact,
    SymSkExact,
    Jacobi,
    InfNorm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Snbin,
        Algorithm::Ssbin,
        Algorithm::SkExact,
        Algorithm::SymSkExact,
        Algorithm::Jacobi,
        Algorithm::InfNorm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Snbin => "snbin",
            Algorithm::Ssbin => "ssbin",
            Algorithm::SkExact => "sk_exact",
            Algorithm::SymSkExact => "sym_sk_exact",
            Algorithm::Jacobi => "jacobi",
            Algorithm::InfNorm => "inf_norm",
        }
    }

    /// Applies only to symmetric matrices; skipped otherwise.
    pub fn symmetric_only(self) -> bool {
        matches!(self, Algorithm::Ssbin | Algorithm::SymSkExact | Algorithm::Jacobi)
    }

    /// Depends on the budget and seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Algorithm::Snbin | Algorithm::Ssbin)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

impl FromStr for HistoryAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "snbin" => HistoryAlgorithm::Snbin,
            "snbin_symmetric" => HistoryAlgorithm::SnbinSymmetric,
            "ssbin" => HistoryAlgorithm::Ssbin,
            "ssbin_no_switch" => HistoryAlgorithm::SsbinNoSwitch,
            "sk_exact" => HistoryAlgorithm::SinkhornKnopp,
            "sym_sk_exact" => HistoryAlgorithm::SymSinkhornKnopp,
            _ => return Err(Error::Config(format!("unknown history algorithm `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Path(PathBuf),
    Corpus(CorpusSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub inputs: Vec<Input>,
    pub algorithms: Vec<Algorithm>,
    pub budgets: Vec<usize>,
    pub seeds_per_run: usize,
    /// Condition numbers are computed only for matrices of order `<= cond_cap`.
    pub cond_cap: usize,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(inputs: Vec<Input>, algorithms: Vec<Algorithm>) -> Self {
        Self {
            inputs,
            algorithms,
            budgets: DEFAULT_BUDGETS.to_vec(),
            seeds_per_run: DEFAULT_SEEDS,
            cond_cap: DEFAULT_COND_CAP,
            format: ReportFormat::Csv,
            out: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.inputs.is_empty() {
            return bad("at least one input is required");
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required");
        }
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return bad("budgets must be a nonempty list of positive integers");
        }
        if self.seeds_per_run == 0 {
            return bad("seeds must be positive");
        }
        if self.threads == Some(0) {
            return bad("threads must be positive");
        }
        Ok(())
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let resolve = |p: &str| match base {
            Some(b) if Path::new(p).is_relative() => b.join(p),
            _ => PathBuf::from(p),
        };
        let list = |v: &str| -> Vec<String> {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        };
        let mut cfg = Self::new(Vec::new(), Vec::new());
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "input" => cfg.inputs.push(Input::Path(resolve(v))),
                "corpus" => cfg.inputs.push(Input::Corpus(v.parse()?)),
                "corpus_file" => {
                    let p = resolve(v);
                    let text = fs::read_to_string(&p)
                        .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                    cfg.inputs
                        .extend(parse_corpus_specs(&text)?.into_iter().map(Input::Corpus));
                }
                "algorithms" => {
                    cfg.algorithms = list(v).iter().map(|s| s.parse()).collect::<Result<_>>()?
                }
                "budgets" => {
                    cfg.budgets = list(v)
                        .iter()
                        .map(|s| config_value(k, s))
                        .collect::<Result<_>>()?
                }
                "seeds" => cfg.seeds_per_run = config_value(k, v)?,
                "cond_cap" => cfg.cond_cap = config_value(k, v)?,
                "format" => cfg.format = v.parse()?,
                "out" => cfg.out = Some(resolve(v)),
                "threads" => cfg.threads = Some(config_value(k, v)?),
                _ => return Err(Error::Config(format!("unknown config key `{k}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: SparseMatrix<f64>,
}

impl NamedMatrix {
    pub fn new(name: impl Into<String>, matrix: SparseMatrix<f64>) -> Self {
        Self {
            name: name.into(),
            matrix,
        }
    }
}

/// Loads or generates every input, failing on the first that cannot be
/// resolved.
pub fn resolve_inputs(inputs: &[Input]) -> Result<Vec<NamedMatrix>> {
    inputs
        .par_iter()
        .map(|input| match input {
            Input::Path(p) => {
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string());
                let m = read_matrix_market(p).map_err(|e| match e {
                    Error::Io(io) => Error::Config(format!("cannot read {}: {io}", p.display())),
                    other => other,
                })?;
                Ok(NamedMatrix::new(name, m))
            }
            Input::Corpus(spec) => Ok(NamedMatrix::new(spec.name(), generate(spec)?)),
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunReport>> {
    cfg.validate()?;
    with_pool(cfg.threads, || {
        let matrices = resolve_inputs(&cfg.inputs)?;
        Ok(run_on(&matrices, cfg))
    })
}

fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(f),
    }
}

struct Baseline {
    ratio: Result<f64, String>,
    cond: Option<f64>,
}

struct Job {
    matrix: usize,
    algorithm: Algorithm,
    /// `None` for deterministic algorithms, which run once per matrix.
    cell: Option<(usize, u64)>,
}

struct Outcome {
    ratio_after: Option<f64>,
    cond_after: Option<f64>,
    wall_time: f64,
    status: String,
}

/// Runs the configured algorithms on already-resolved matrices. Failures are
/// recorded in each report's `status`; rows are sorted by matrix name,
/// algorithm, budget and seed.
pub fn run_on(matrices: &[NamedMatrix], cfg: &ExperimentConfig) -> Vec<RunReport> {
    let cap = cfg.cond_cap;
    let baselines: Vec<Baseline> = matrices
        .par_iter()
        .map(|m| Baseline {
            ratio: ratio(&m.matrix).map(|r| r.value).map_err(|e| e.to_string()),
            cond: cond_if_small(&m.matrix, cap),
        })
        .collect();

    let mut jobs = Vec::new();
    for (mi, m) in matrices.iter().enumerate() {
        let symmetric = m.matrix.is_symmetric();
        for &algorithm in &cfg.algorithms {
            if algorithm.symmetric_only() && !symmetric {
                continue;
            }
            if algorithm.is_stochastic() {
                for &nmv in &cfg.budgets {
                    for seed in 0..cfg.seeds_per_run as u64 {
                        jobs.push(Job {
                            matrix: mi,
                            algorithm,
                            cell: Some((nmv, seed)),
                        });
                    }
                }
            } else {
                jobs.push(Job {
                    matrix: mi,
                    algorithm,
                    cell: None,
                });
            }
        }
    }

    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|job| {
            let a = &matrices[job.matrix].matrix;
            if let Err(e) = &baselines[job.matrix].ratio {
                return Outcome {
                    ratio_after: None,
                    cond_after: None,
                    wall_time: 0.0,
                    status: e.clone(),
                };
            }
            run_cell(a, job.algorithm, job.cell, cap)
        })
        .collect();

    let mut reports = Vec::new();
    for (job, out) in jobs.iter().zip(outcomes) {
        let m = &matrices[job.matrix];
        let base = &baselines[job.matrix];
        let cells: Vec<(usize, u64)> = match job.cell {
            Some(c) => vec![c],
            None => cfg
                .budgets
                .iter()
                .flat_map(|&b| (0..cfg.seeds_per_run as u64).map(move |s| (b, s)))
                .collect(),
        };
        for (nmv, seed) in cells {
            reports.push(RunReport {
                matrix_name: m.name.clone(),
                algorithm: job.algorithm.to_string(),
                seed,
                nmv,
                ratio_before: base.ratio.as_ref().ok().copied(),
                ratio_after: out.ratio_after,
                cond_before: base.cond,
                cond_after: out.cond_after,
                wall_time: out.wall_time,
                status: out.status.clone(),
            });
        }
    }
    reports.sort_by(|x, y| {
        (&x.matrix_name, &x.algorithm, x.nmv, x.seed).cmp(&(&y.matrix_name, &y.algorithm, y.nmv, y.seed))
    });
    reports
}

fn cond_if_small(a: &SparseMatrix<f64>, cap: usize) -> Option<f64> {
    if a.nrows() <= cap {
        condition_number(a, cap).ok()
    } else {
        None
    }
}

/// Scaling for one cell, plus whether an exact method met its tolerance.
pub fn compute_scaling(
    a: &SparseMatrix<f64>,
    algorithm: Algorithm,
    nmv: usize,
    seed: u64,
) -> Result<(DiagonalScaling<f64>, bool)> {
    let opts = ExactOptions::default();
    Ok(match algorithm {
        Algorithm::Snbin => (snbin(a, nmv, &mut ProbeSource::new(seed))?, true),
        Algorithm::Ssbin => (
            DiagonalScaling::symmetric(ssbin(a, nmv, &mut ProbeSource::new(seed))?)?,
            true,
        ),
        Algorithm::SkExact => {
            let eq = sinkhorn_knopp(&a.elementwise_square(), &opts)?;
            (eq.scaling.sqrt(), eq.converged)
        }
        Algorithm::SymSkExact => {
            let eq = sym_sinkhorn_knopp(&a.elementwise_square(), &opts)?;
            let x = eq.scaling.iter().map(|v| v.sqrt()).collect();
            (DiagonalScaling::symmetric(x)?, eq.converged)
        }
        Algorithm::Jacobi => (jacobi_scale(a)?.0, true),
        Algorithm::InfNorm => (inf_norm_scale(a)?, true),
    })
}

fn run_cell(a: &SparseMatrix<f64>, algorithm: Algorithm, cell: Option<(usize, u64)>, cap: usize) -> Outcome {
    let (nmv, seed) = cell.unwrap_or((0, 0));
    let start = Instant::now();
    let result = compute_scaling(a, algorithm, nmv, seed);
    let wall_time = start.elapsed().as_secs_f64();
    let failed = |status: String| Outcome {
        ratio_after: None,
        cond_after: None,
        wall_time,
        status,
    };
    let (s, converged) = match result {
        Ok(v) => v,
        Err(e) => return failed(e.to_string()),
    };
    let scaled = match a.scale(&s) {
        Ok(m) => m,
        Err(e) => return failed(e.to_string()),
    };
    let ratio_after = match ratio(&scaled) {
        Ok(r) => r.value,
        Err(e) => return failed(e.to_string()),
    };
    Outcome {
        ratio_after: Some(ratio_after),
        cond_after: cond_if_small(&scaled, cap),
        wall_time,
        status: if converged {
            STATUS_OK.into()
        } else {
            Error::NotConverged {
                iterations: ExactOptions::<f64>::default().max_iters,
            }
            .to_string()
        },
    }
}

/// One point of a convergence history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub seed: u64,
    pub log10_ratio: f64,
    /// `snbin` on the same symmetric matrix, symmetrized.
    pub log10_ratio_snbin: Option<f64>,
    /// `ssbin` without the switch to alternating iterates.
    pub log10_ratio_no_switch: Option<f64>,
}

/// Histories for seeds `0..seeds`. The variant columns are filled only for
/// `ssbin` on a symmetric matrix.
pub fn emit_history(
    a: &SparseMatrix<f64>,
    algorithm: HistoryAlgorithm,
    nmv: usize,
    seeds: u64,
) -> Result<Vec<HistoryRow>> {
    let variants = algorithm == HistoryAlgorithm::Ssbin && a.is_symmetric();
    let per_seed: Vec<Vec<HistoryRow>> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let main = convergence_history(a, algorithm, nmv, seed)?;
            let (sn, ns) = if variants {
                (
                    Some(convergence_history(a, HistoryAlgorithm::SnbinSymmetric, nmv, seed)?),
                    Some(convergence_history(a, HistoryAlgorithm::SsbinNoSwitch, nmv, seed)?),
                )
            } else {
                (None, None)
            };
            Ok(main
                .iter()
                .enumerate()
                .map(|(k, &v)| HistoryRow {
                    iteration: k,
                    seed,
                    log10_ratio: v,
                    log10_ratio_snbin: sn.as_ref().and_then(|h| h.get(k).copied()),
                    log10_ratio_no_switch: ns.as_ref().and_then(|h| h.get(k).copied()),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

pub fn write_history<W: Write>(w: W, rows: &[HistoryRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record([
        "iteration",
        "seed",
        "log10_ratio",
        "log10_ratio_snbin",
        "log10_ratio_no_switch",
    ])?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Family;
    use crate::io::format_report;

    fn corpus(family: Family, n: usize, seed: u64) -> Input {
        Input::Corpus(CorpusSpec::new(family, n, seed))
    }

    fn sans_time(mut r: Vec<RunReport>) -> Vec<RunReport> {
        for x in &mut r {
            x.wall_time = 0.0;
        }
        r
    }

    #[test]
    fn one_matrix_one_budget_five_seeds() {
        let mut cfg = ExperimentConfig::new(vec![corpus(Family::Spd, 30, 1)], vec![Algorithm::Ssbin]);
        cfg.budgets = vec![32];
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.len(), 5);
        assert!(r.iter().all(|x| x.is_ok() && x.nmv == 32));
        assert_eq!(r.iter().map(|x| x.seed).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn identity_ends_equilibrated() {
        let id = NamedMatrix::new("id", SparseMatrix::identity(6));
        let cfg = ExperimentConfig::new(vec![], Algorithm::ALL.to_vec());
        for r in run_on(&[id], &cfg) {
            let after = r.ratio_after.unwrap();
            if r.algorithm.parse::<Algorithm>().unwrap().is_stochastic() {
                // a probe-based estimate of I is not exactly I
                assert!((1.0..10.0).contains(&after), "{r:?}");
            } else {
                assert!((after - 1.0).abs() < 1e-8, "{r:?}");
                assert_eq!(r.cond_after, Some(1.0));
            }
        }
    }

    #[test]
    fn row_count_and_symmetric_only_skipping() {
        let inputs = vec![
            corpus(Family::Spd, 20, 1),
            corpus(Family::NonsymmetricGeneral, 20, 2),
            corpus(Family::ReducibleBlocks, 20, 3),
        ];
        let mut cfg = ExperimentConfig::new(inputs, Algorithm::ALL.to_vec());
        cfg.budgets = vec![8, 16];
        cfg.seeds_per_run = 3;
        let r = run_experiment(&cfg).unwrap();
        // 2 symmetric matrices x 6 algorithms + 1 nonsymmetric x 3
        assert_eq!(r.len(), (2 * 6 + 3) * 2 * 3);
        assert!(r
            .iter()
            .filter(|x| x.matrix_name.starts_with("nonsym"))
            .all(|x| !["ssbin", "sym_sk_exact", "jacobi"].contains(&x.algorithm.as_str())));
        assert!(r.iter().all(|x| x.is_ok()), "{:?}", r.iter().find(|x| !x.is_ok()));
        let mut sorted = r.clone();
        sorted.sort_by(|x, y| (&x.matrix_name, &x.algorithm, x.nmv, x.seed).cmp(&(&y.matrix_name, &y.algorithm, y.nmv, y.seed)));
        assert_eq!(sorted, r);
    }

    #[test]
    fn output_is_reproducible() {
        let inputs = vec![corpus(Family::SymmetricIndefinite, 25, 4), corpus(Family::PermutationPlusNoise, 25, 5)];
        let mut cfg = ExperimentConfig::new(inputs, vec![Algorithm::Snbin, Algorithm::Ssbin, Algorithm::SkExact]);
        cfg.threads = Some(3);
        let a = sans_time(run_experiment(&cfg).unwrap());
        cfg.threads = Some(1);
        let b = sans_time(run_experiment(&cfg).unwrap());
        let text = |r: &[RunReport]| {
            let mut out = Vec::new();
            format_report(&mut out, r, ReportFormat::Csv).unwrap();
            out
        };
        assert_eq!(text(&a), text(&b));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let zero_row = SparseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let good = SparseMatrix::identity(3);
        // nonsymmetric without total support: exact SK cannot converge
        let tri = SparseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let mut cfg = ExperimentConfig::new(vec![], vec![Algorithm::Snbin, Algorithm::SkExact]);
        cfg.budgets = vec![16];
        cfg.seeds_per_run = 2;
        let r = run_on(
            &[NamedMatrix::new("a_zero", zero_row), NamedMatrix::new("b_good", good), NamedMatrix::new("c_tri", tri)],
            &cfg,
        );
        assert_eq!(r.len(), 12);
        for x in &r {
            match x.matrix_name.as_str() {
                "a_zero" => assert!(!x.is_ok() && x.ratio_before.is_none() && x.ratio_after.is_none()),
                "b_good" => assert!(x.is_ok()),
                _ if x.algorithm == "sk_exact" => {
                    assert!(x.status.contains("converge"), "{x:?}");
                    assert!(x.ratio_after.is_some());
                }
                _ => assert!(x.is_ok()),
            }
        }
    }

    #[test]
    fn condition_numbers_respect_cap() {
        let mut cfg = ExperimentConfig::new(vec![corpus(Family::Spd, 30, 1)], vec![Algorithm::Jacobi]);
        cfg.budgets = vec![1];
        cfg.seeds_per_run = 1;
        let r = run_experiment(&cfg).unwrap();
        assert!(r[0].cond_before.is_some() && r[0].cond_after.is_some());
        cfg.cond_cap = 29;
        let r = run_experiment(&cfg).unwrap();
        assert!(r[0].cond_before.is_none() && r[0].cond_after.is_none());
    }

    #[test]
    fn config_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("specs.txt"), "family=spd n=10 seed=1\nfamily=spd n=12 seed=2\n").unwrap();
        let cfg = ExperimentConfig::parse(
            "# demo\ninput = a.mtx\ncorpus = family=reducible_blocks blocks=3,4 seed=1\ncorpus_file = specs.txt\n\
             algorithms = ssbin, sk_exact\nbudgets = 16,32\nseeds = 2\nformat = json\nout = r.json\nthreads = 2\n",
            Some(dir.path()),
        )
        .unwrap();
        assert_eq!(cfg.inputs.len(), 4);
        assert_eq!(cfg.inputs[0], Input::Path(dir.path().join("a.mtx")));
        assert_eq!(cfg.algorithms, vec![Algorithm::Ssbin, Algorithm::SkExact]);
        assert_eq!(cfg.budgets, vec![16, 32]);
        assert_eq!(cfg.seeds_per_run, 2);
        assert_eq!(cfg.format, ReportFormat::Json);
        assert_eq!(cfg.out, Some(dir.path().join("r.json")));
        assert_eq!(cfg.threads, Some(2));

        let defaults = ExperimentConfig::parse("input = x.mtx\nalgorithms = snbin\n", None).unwrap();
        assert_eq!(defaults.budgets, vec![32, 64, 128]);
        assert_eq!(defaults.seeds_per_run, 5);

        for bad in [
            "algorithms = ssbin\n",
            "input = x.mtx\n",
            "input = x.mtx\nalgorithms = magic\n",
            "input = x.mtx\nalgorithms = ssbin\nbudgets = 0\n",
            "input = x.mtx\nalgorithms = ssbin\nseeds = -1\n",
            "input = x.mtx\nalgorithms = ssbin\nwhat = 1\n",
            "input x.mtx\n",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad, None), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn missing_input_file_is_config_error() {
        let cfg = ExperimentConfig::new(vec![Input::Path("/nonexistent/m.mtx".into())], vec![Algorithm::Snbin]);
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn history_rows_and_columns() {
        let a = generate(&CorpusSpec::new(Family::ReducibleBlocks, 20, 1)).unwrap();
        let rows = emit_history(&a, HistoryAlgorithm::Ssbin, 16, 3).unwrap();
        assert_eq!(rows.len(), 3 * 17);
        let first: Vec<f64> = rows.iter().filter(|r| r.iteration == 0).map(|r| r.log10_ratio).collect();
        assert!(first.iter().all(|&v| v == first[0]));
        assert!(rows.iter().all(|r| r.log10_ratio_snbin.is_some() && r.log10_ratio_no_switch.is_some()));

        let ns = generate(&CorpusSpec::new(Family::NonsymmetricGeneral, 20, 1)).unwrap();
        let rows = emit_history(&ns, HistoryAlgorithm::Snbin, 8, 1).unwrap();
        assert!(rows.iter().all(|r| r.log10_ratio_snbin.is_none()));

        let mut out = Vec::new();
        write_history(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("iteration,seed,log10_ratio,log10_ratio_snbin,log10_ratio_no_switch\n"));
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert!(text.lines().nth(1).unwrap().ends_with(",,"));
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("ssbin_no_switch".parse::<HistoryAlgorithm>().unwrap(), HistoryAlgorithm::SsbinNoSwitch);
        assert!("nope".parse::<HistoryAlgorithm>().is_err());
    }
}
