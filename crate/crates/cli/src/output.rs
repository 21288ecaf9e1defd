//! CSV writing: fixed scientific format with nine significant digits.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sprint_core::model::Histogram;

use crate::error::{CliError, CliResult};

pub fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes to `path`, or stdout when `None`.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        })?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_table(out: Box<dyn Write>, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `results.csv` → `results.histogram.csv`.
pub fn histogram_path(out: &Path) -> PathBuf {
    out.with_extension("histogram.csv")
}

pub fn write_histogram(path: &Path, h: &Histogram) -> CliResult<()> {
    let rows: Vec<Vec<String>> = h
        .bins()
        .map(|(l, r, c)| vec![num(l), num(r), c.to_string()])
        .collect();
    write_table(
        sink(Some(path))?,
        &["bin_left", "bin_right", "count"],
        &rows,
    )
}
