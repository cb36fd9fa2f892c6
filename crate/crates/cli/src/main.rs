use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use equilib::corpus::{generate, read_corpus_specs};
use equilib::diagnostics::HistoryAlgorithm;
use equilib::experiment::{emit_history, run_experiment, write_history, ExperimentConfig};
use equilib::io::{format_report, read_matrix_market, write_matrix_market, ReportFormat, Symmetry};
use equilib::structure::structure_report;
use equilib::Error;

#[derive(Parser)]
#[command(name = "equilibrate", version, about = "Diagonal equilibration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment and write one report row per cell.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out` in the config; stdout if neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `format` in the config.
        #[arg(long)]
        format: Option<ReportFormat>,
    },
    /// Write per-iteration log10 ratios as CSV.
    History {
        #[arg(long)]
        matrix: PathBuf,
        /// snbin, snbin_symmetric, ssbin, ssbin_no_switch, sk_exact or sym_sk_exact.
        #[arg(long, default_value = "ssbin")]
        alg: HistoryAlgorithm,
        /// Iterations (matrix-vector product budget for the stochastic methods).
        #[arg(long, default_value_t = 100)]
        nmv: usize,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate Matrix Market files from a corpus spec file.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the structural scalability report of a matrix.
    Check {
        #[arg(long)]
        matrix: PathBuf,
    },
}

const FAILURE: u8 = 1;
const CONFIG_ERROR: u8 = 2;

/// Exit status: configuration problems are 2, anything else 1.
fn code(e: &Error) -> ExitCode {
    ExitCode::from(match e {
        Error::Config(_) => CONFIG_ERROR,
        _ => FAILURE,
    })
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    code(&e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, format } => run(&config, out, format),
        Command::History {
            matrix,
            alg,
            nmv,
            seeds,
            out,
        } => history(&matrix, alg, nmv, seeds, out),
        Command::Gen { spec, out_dir } => gen(&spec, &out_dir),
        Command::Check { matrix } => check(&matrix),
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(config: &Path, out: Option<PathBuf>, format: Option<ReportFormat>) -> ExitCode {
    let cfg = match ExperimentConfig::load(config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let reports = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let format = format.unwrap_or(cfg.format);
    let written = output(out.or(cfg.out).as_deref())
        .map_err(Error::from)
        .and_then(|mut w| {
            format_report(&mut w, &reports, format)?;
            w.flush()?;
            Ok(())
        });
    if let Err(e) = written {
        return fail(e);
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.is_ok()).collect();
    for r in &failed {
        eprintln!(
            "failed: {} {} nmv={} seed={}: {}",
            r.matrix_name, r.algorithm, r.nmv, r.seed, r.status
        );
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILURE)
    }
}

fn history(matrix: &Path, alg: HistoryAlgorithm, nmv: usize, seeds: u64, out: Option<PathBuf>) -> ExitCode {
    let result = read_matrix_market(matrix)
        .and_then(|a| emit_history(&a, alg, nmv, seeds))
        .and_then(|rows| write_history(output(out.as_deref())?, &rows));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn gen(spec: &Path, out_dir: &Path) -> ExitCode {
    let specs = match read_corpus_specs(spec) {
        Ok(s) => s,
        Err(Error::Io(e)) => return fail(Error::Config(format!("cannot read {}: {e}", spec.display()))),
        Err(e) => return fail(e),
    };
    if let Err(e) = fs::create_dir_all(out_dir) {
        return fail(e.into());
    }
    let mut status = ExitCode::SUCCESS;
    for s in &specs {
        let path = out_dir.join(format!("{}.mtx", s.name()));
        let result = generate(s).and_then(|m| {
            let symmetry = if m.is_symmetric() {
                Symmetry::Symmetric
            } else {
                Symmetry::General
            };
            write_matrix_market(&path, &m, symmetry)
        });
        match result {
            Ok(()) => println!("{}", path.display()),
            Err(e) => {
                eprintln!("error: {}: {e}", s.name());
                status = ExitCode::from(FAILURE);
            }
        }
    }
    status
}

fn check(matrix: &Path) -> ExitCode {
    let result = read_matrix_market(matrix).and_then(|m| {
        let report = structure_report(&m)?;
        println!("matrix: {}", matrix.display());
        println!("size: {}x{}, nnz {}", m.nrows(), m.ncols(), m.nnz());
        println!("symmetric: {}", m.is_symmetric());
        println!("has_support: {}", report.has_support);
        println!("has_total_support: {}", report.has_total_support);
        println!("is_irreducible: {}", report.is_irreducible);
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
