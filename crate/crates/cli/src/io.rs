//! CSV ingestion and atomic output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use arbound_core::timeseries::{Observation, RawSeries};
use chrono::NaiveDate;

use crate::error::{CliError, Result};

pub const DEFAULT_MISSING: [&str; 2] = ["", "."];

/// Reads a dated series. Row numbers in errors count the header as row 1.
///
/// The date column defaults to the first column and the value column to the
/// first other column.
pub fn load_csv(
    path: &Path,
    value_column: Option<&str>,
    date_column: Option<&str>,
    missing_tokens: &[&str],
) -> Result<RawSeries> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers().map_err(|e| CliError::io(path, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Config(format!("{}: row 1: column {name:?} not found", path.display())))
    };
    let date_idx = match date_column {
        Some(name) => find(name)?,
        None => 0,
    };
    let value_idx = match value_column {
        Some(name) => find(name)?,
        None => (0..headers.len())
            .find(|&i| i != date_idx)
            .ok_or_else(|| CliError::Config(format!("{}: row 1: no value column", path.display())))?,
    };

    let mut observations = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| CliError::io(path, format_args!("row {row}: {e}")))?;
        let field = |idx: usize| {
            record
                .get(idx)
                .map(str::trim)
                .ok_or_else(|| CliError::Config(format!("{}: row {row}: missing field {}", path.display(), idx + 1)))
        };
        let date_text = field(date_idx)?;
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|e| {
            CliError::Config(format!("{}: row {row}: cannot parse date {date_text:?}: {e}", path.display()))
        })?;
        let value_text = field(value_idx)?;
        let value = if missing_tokens.contains(&value_text) {
            None
        } else {
            Some(value_text.parse::<f64>().map_err(|e| {
                CliError::Config(format!("{}: row {row}: cannot parse value {value_text:?}: {e}", path.display()))
            })?)
        };
        observations.push(Observation { date, value });
    }
    RawSeries::new(observations, path.display().to_string()).map_err(|e| match e {
        arbound_core::Error::NonMonotoneDates { row } => {
            CliError::Config(format!("{}: row {}: date not after the previous row", path.display(), row + 1))
        }
        other => CliError::Config(format!("{}: {other}", path.display())),
    })
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        write(&mut out).map_err(|e| CliError::io(path, e))?;
        out.flush().map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_csv<R: serde::Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    write_atomic(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()
    })
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        out.write_all(b"\n")
    })
}
