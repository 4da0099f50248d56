//! Series ingestion and emission: plain text (one count per line) and CSV
//! with a caller-selected column.

use crate::CliError;
use inar::CountSeries;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

fn parse_count(token: &str, place: &str) -> Result<u64, CliError> {
    token.parse::<u64>().map_err(|_| {
        CliError::Data(format!(
            "{place}: cannot parse '{token}' as a nonnegative integer count"
        ))
    })
}

/// Reads a series from `path`. Without `csv_column` the file is plain text:
/// one count per line, blank lines ignored. With `csv_column` the file is
/// CSV and the named (header required) or zero-based indexed (no header
/// assumed) column is extracted in row order.
pub fn read_series(path: &Path, csv_column: Option<&str>) -> Result<CountSeries, CliError> {
    let values = match csv_column {
        None => read_plain(path)?,
        Some(column) => read_csv_column(path, column)?,
    };
    if values.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no observations found",
            path.display()
        )));
    }
    CountSeries::new(values)
        .map_err(|err| CliError::Data(format!("{}: {err}", path.display())))
}

fn read_plain(path: &Path) -> Result<Vec<u64>, CliError> {
    let file = File::open(path)
        .map_err(|err| CliError::Data(format!("cannot open {}: {err}", path.display())))?;
    let mut values = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line
            .map_err(|err| CliError::Data(format!("cannot read {}: {err}", path.display())))?;
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        values.push(parse_count(
            token,
            &format!("{} line {}", path.display(), idx + 1),
        )?);
    }
    Ok(values)
}

fn read_csv_column(path: &Path, column: &str) -> Result<Vec<u64>, CliError> {
    // A purely numeric selector is a zero-based index into headerless rows;
    // anything else names a column in the header line.
    let index: Option<usize> = column.parse().ok();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(index.is_none())
        .flexible(true)
        .from_path(path)
        .map_err(|err| CliError::Data(format!("cannot open {}: {err}", path.display())))?;

    let col_idx = match index {
        Some(idx) => idx,
        None => {
            let headers = reader
                .headers()
                .map_err(|err| CliError::Data(format!("{}: {err}", path.display())))?;
            headers
                .iter()
                .position(|h| h.trim() == column)
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "{}: no column named '{column}' (headers: {})",
                        path.display(),
                        headers.iter().collect::<Vec<_>>().join(", ")
                    ))
                })?
        }
    };

    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record =
            record.map_err(|err| CliError::Data(format!("{}: {err}", path.display())))?;
        let data_row = row + if index.is_none() { 2 } else { 1 };
        let token = record.get(col_idx).ok_or_else(|| {
            CliError::Data(format!(
                "{} row {data_row}: no column {col_idx}",
                path.display()
            ))
        })?;
        values.push(parse_count(
            token.trim(),
            &format!("{} row {data_row}", path.display()),
        )?);
    }
    Ok(values)
}

/// Writes a series in the plain format `read_series` accepts: one count per
/// line.
pub fn write_series_plain<W: Write>(mut out: W, series: &CountSeries) -> std::io::Result<()> {
    for &value in series.values() {
        writeln!(out, "{value}")?;
    }
    Ok(())
}
