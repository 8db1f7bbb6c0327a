//! CSV records and line-oriented text artifacts.

use std::fs;
use std::path::Path;

use super::{ExperimentError, FitResult, Result, ScalingRecord};

pub const CSV_HEADER: [&str; 9] = ["symbol", "eps", "lambda", "p", "moment", "stderr", "n_replicas", "seed", "wall_ms"];

/// Records as CSV text. Floats use the shortest round-trip form; a missing
/// standard error is an empty field.
pub fn records_to_csv(records: &[ScalingRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| ExperimentError::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in records {
        w.write_record([
            r.symbol.name().to_string(),
            r.eps.to_string(),
            r.lambda.to_string(),
            r.p.to_string(),
            r.moment.to_string(),
            r.stderr.map_or(String::new(), |s| s.to_string()),
            r.n_replicas.to_string(),
            r.seed.to_string(),
            r.wall_ms.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_records(text: &str) -> Result<Vec<ScalingRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| ExperimentError::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(ExperimentError::Parse(format!(
            "unexpected header '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(|e| ExperimentError::Parse(e.to_string()))?;
        let bad = |col: &str, v: &str| ExperimentError::Parse(format!("row {}: bad {col} '{v}'", line + 1));
        let f = |i: usize| row[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i], &row[i]));
        let u = |i: usize| row[i].parse::<u64>().map_err(|_| bad(CSV_HEADER[i], &row[i]));
        out.push(ScalingRecord {
            symbol: row[0].parse().map_err(|_| bad("symbol", &row[0]))?,
            eps: f(1)?,
            lambda: f(2)?,
            p: f(3)?,
            moment: f(4)?,
            stderr: if row[5].is_empty() { None } else { Some(f(5)?) },
            n_replicas: u(6)? as usize,
            seed: u(7)?,
            wall_ms: u(8)?,
        });
    }
    Ok(out)
}

/// Write `text`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| ExperimentError::io(path, e))
}

pub fn write_records(path: &Path, records: &[ScalingRecord]) -> Result<()> {
    write_text(path, &records_to_csv(records)?)
}

pub fn read_records(path: &Path) -> Result<Vec<ScalingRecord>> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    parse_records(&text).map_err(|e| match e {
        ExperimentError::Parse(m) => ExperimentError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// One fit per line.
pub fn write_fits(path: &Path, fits: &[FitResult]) -> Result<()> {
    let text: String = fits.iter().map(|f| format!("{f}\n")).collect();
    write_text(path, &text)
}
