//! CSV input and output: numeric matrices, label columns, grids.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{CliError, CliResult};

/// Whether the first CSV line is a header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HeaderMode {
    /// Header iff the first line has a non-numeric field.
    Auto,
    Present,
    Absent,
}

/// A numeric table read from CSV together with the raw bytes (for the
/// manifest digest). A column named `label` (when a header is present) is
/// validated and dropped from the features.
#[derive(Debug, Clone)]
pub struct Table {
    pub data: Array2<f64>,
    pub bytes: Vec<u8>,
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.display().to_string(), line, message: message.into() }
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn records(path: &Path, bytes: &[u8]) -> CliResult<Vec<(u64, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(bytes);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn is_header(rec: &csv::StringRecord, mode: HeaderMode) -> bool {
    match mode {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => rec.iter().any(|f| f.parse::<f64>().is_err()),
    }
}

pub fn read_table(path: &Path, mode: HeaderMode) -> CliResult<Table> {
    let bytes = read_bytes(path)?;
    let mut recs = records(path, &bytes)?;
    if recs.is_empty() {
        return Err(parse_err(path, 1, "no rows"));
    }
    let names: Vec<String> = if is_header(&recs[0].1, mode) {
        recs.remove(0).1.iter().map(str::to_string).collect()
    } else {
        (1..=recs[0].1.len()).map(|j| format!("x{j}")).collect()
    };
    let label_col = names.iter().position(|n| n.eq_ignore_ascii_case("label"));
    let width = names.len();
    let d = width - label_col.is_some() as usize;
    if d == 0 {
        return Err(parse_err(path, 1, "no feature columns"));
    }
    if recs.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    let mut values = Vec::with_capacity(recs.len() * d);
    for (line, rec) in &recs {
        if rec.len() != width {
            return Err(parse_err(path, *line, format!("expected {width} fields, found {}", rec.len())));
        }
        for (j, field) in rec.iter().enumerate() {
            if Some(j) == label_col {
                field
                    .parse::<usize>()
                    .map_err(|_| parse_err(path, *line, format!("label {field:?} is not a non-negative integer")))?;
                continue;
            }
            let v = field
                .parse::<f64>()
                .map_err(|_| parse_err(path, *line, format!("field {} ({field:?}) is not a number", j + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(path, *line, format!("field {} is not finite", j + 1)));
            }
            values.push(v);
        }
    }
    let n = recs.len();
    let data = Array2::from_shape_vec((n, d), values).expect("row widths were checked");
    Ok(Table { data, bytes })
}

/// Labels from a `row_index,label` file, a data file with a `label` column,
/// or a single headerless column of integers.
pub fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let bytes = read_bytes(path)?;
    let mut recs = records(path, &bytes)?;
    if recs.is_empty() {
        return Err(parse_err(path, 1, "no rows"));
    }
    let col = if is_header(&recs[0].1, HeaderMode::Auto) {
        let (line, header) = recs.remove(0);
        header
            .iter()
            .position(|n| n.eq_ignore_ascii_case("label"))
            .ok_or_else(|| parse_err(path, line, "header has no `label` column"))?
    } else if recs[0].1.len() == 1 {
        0
    } else {
        recs[0].1.len() - 1
    };
    recs.iter()
        .map(|(line, rec)| {
            let field = rec.get(col).ok_or_else(|| parse_err(path, *line, "missing label field"))?;
            field.parse::<usize>().map_err(|_| parse_err(path, *line, format!("label {field:?} is not an integer")))
        })
        .collect()
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn write_rows<I: IntoIterator<Item = Vec<String>>>(path: &Path, header: &[&str], rows: I) -> CliResult<()> {
    let w = create(path)?;
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let io = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    out.write_record(header).map_err(io)?;
    for row in rows {
        out.write_record(&row).map_err(io)?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

/// `row_index,label` with 0-based row indices and 1-based labels.
pub fn write_labels(path: &Path, labels: &[usize]) -> CliResult<()> {
    write_rows(path, &["row_index", "label"], labels.iter().enumerate().map(|(i, l)| vec![i.to_string(), l.to_string()]))
}

/// Feature columns `x1..xd` plus an optional trailing `label` column.
pub fn write_matrix(path: &Path, data: &Array2<f64>, labels: Option<&[usize]>) -> CliResult<()> {
    let d = data.ncols();
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = data.rows().into_iter().enumerate().map(|(i, r)| {
        let mut row: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            row.push(l[i].to_string());
        }
        row
    });
    write_rows(path, &header_refs, rows)
}

/// `iteration,loglik` with 1-based iterations.
pub fn write_trace(path: &Path, trace: &[f64]) -> CliResult<()> {
    write_rows(path, &["iteration", "loglik"], trace.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), v.to_string()]))
}

/// `x,y,density` triples.
pub fn write_grid(path: &Path, cells: &[(f64, f64, f64)]) -> CliResult<()> {
    write_rows(path, &["x", "y", "density"], cells.iter().map(|(x, y, f)| vec![x.to_string(), y.to_string(), f.to_string()]))
}
