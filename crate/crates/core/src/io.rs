//! Matrix Market coordinate files and run-report serialization.
//!
//! Only `%%MatrixMarket matrix coordinate real general|symmetric` is accepted.
//! Symmetric files are expanded to full storage on read.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::SparseMatrix;

/// Storage layout of a Matrix Market file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    /// Only the lower triangle is stored.
    Symmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix<f64>> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix<f64>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (hline, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty file")),
    };
    let symmetry = parse_header(hline, &header)?;

    let mut size = None;
    for (n, line) in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(n, "size line must hold rows, columns and entry count"));
        }
        size = Some((
            parse_field::<usize>(n, f[0], "row count")?,
            parse_field::<usize>(n, f[1], "column count")?,
            parse_field::<usize>(n, f[2], "entry count")?,
        ));
        break;
    }
    let Some((nrows, ncols, nnz)) = size else {
        return Err(parse_err(hline, "missing size line"));
    };
    if symmetry == Symmetry::Symmetric && nrows != ncols {
        return Err(parse_err(hline, "symmetric matrix must be square"));
    }

    let mut entries = Vec::with_capacity(nnz * if symmetry == Symmetry::Symmetric { 2 } else { 1 });
    let mut seen = 0;
    let mut last_line = hline;
    for (n, line) in lines {
        let line = line?;
        last_line = n;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if seen == nnz {
            return Err(parse_err(n, format!("more than the declared {nnz} entries")));
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(n, "entry line must hold row, column and value"));
        }
        let i = parse_index(n, f[0], nrows)?;
        let j = parse_index(n, f[1], ncols)?;
        let v = parse_field::<f64>(n, f[2], "value")?;
        if !v.is_finite() {
            return Err(parse_err(n, "value is not finite"));
        }
        entries.push((i, j, v));
        if symmetry == Symmetry::Symmetric && i != j {
            entries.push((j, i, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(last_line, format!("expected {nnz} entries, found {seen}")));
    }
    SparseMatrix::from_triplets(nrows, ncols, entries)
}

fn parse_header(line: usize, header: &str) -> Result<Symmetry> {
    let f: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if f.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(line, "missing %%MatrixMarket banner"));
    }
    if f.len() != 5 {
        return Err(parse_err(line, "banner must have object, format, field and symmetry"));
    }
    if f[1] != "matrix" {
        return Err(Error::UnsupportedFormat(format!("object `{}`", f[1])));
    }
    if f[2] != "coordinate" {
        return Err(Error::UnsupportedFormat(format!("format `{}`", f[2])));
    }
    if f[3] != "real" {
        return Err(Error::UnsupportedFormat(format!("field `{}`", f[3])));
    }
    match f[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(Error::UnsupportedFormat(format!("symmetry `{other}`"))),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_field<T: FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{s}`")))
}

fn parse_index(line: usize, s: &str, bound: usize) -> Result<usize> {
    let k: usize = parse_field(line, s, "index")?;
    if k == 0 || k > bound {
        return Err(parse_err(line, format!("index {k} outside 1..={bound}")));
    }
    Ok(k - 1)
}

pub fn write_matrix_market(
    path: impl AsRef<Path>,
    m: &SparseMatrix<f64>,
    symmetry: Symmetry,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_matrix_market(&mut w, m, symmetry)?;
    w.flush()?;
    Ok(())
}

/// Writes `m` with values in shortest round-trip notation.
pub fn format_matrix_market<W: Write>(
    w: &mut W,
    m: &SparseMatrix<f64>,
    symmetry: Symmetry,
) -> Result<()> {
    let lower = symmetry == Symmetry::Symmetric;
    if lower && !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let kind = if lower { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let nnz = m.iter().filter(|&(i, j, _)| !lower || j <= i).count();
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), nnz)?;
    for (i, j, v) in m.iter() {
        if !lower || j <= i {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

/// Output format of a report table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("unknown report format `{s}`"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

pub const STATUS_OK: &str = "ok";

/// One (matrix, algorithm, budget, seed) cell of an experiment.
///
/// The ratio fields are `None` only when the run failed, in which case
/// `status` carries the error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub matrix_name: String,
    pub algorithm: String,
    pub seed: u64,
    pub nmv: usize,
    pub ratio_before: Option<f64>,
    pub ratio_after: Option<f64>,
    pub cond_before: Option<f64>,
    pub cond_after: Option<f64>,
    pub wall_time: f64,
    pub status: String,
}

impl RunReport {
    pub const COLUMNS: [&'static str; 10] = [
        "matrix_name",
        "algorithm",
        "seed",
        "nmv",
        "ratio_before",
        "ratio_after",
        "cond_before",
        "cond_after",
        "wall_time",
        "status",
    ];

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

pub fn write_report(
    reports: &[RunReport],
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_report(&mut w, reports, format)?;
    w.flush()?;
    Ok(())
}

pub fn format_report<W: Write>(w: &mut W, reports: &[RunReport], format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            wtr.write_record(RunReport::COLUMNS)?;
            for r in reports {
                wtr.serialize(r)?;
            }
            wtr.flush()?;
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, reports)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<Vec<RunReport>> {
    parse_report(File::open(path)?, format)
}

pub fn parse_report<R: Read>(r: R, format: ReportFormat) -> Result<Vec<RunReport>> {
    match format {
        ReportFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(r);
            let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
            if header != RunReport::COLUMNS {
                return Err(Error::Config(format!("unexpected report columns {header:?}")));
            }
            Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
        }
        ReportFormat::Json => Ok(serde_json::from_reader(r)?),
    }
}
