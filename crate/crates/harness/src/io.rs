//! Atomic file output and single-column series files.

use std::fs;
use std::io::Write;
use std::path::Path;

use multiscaling::{PathMeta, PathSeries64};
use tempfile::NamedTempFile;

use crate::error::{HarnessError, Result};

/// Writes `contents` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| HarnessError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| HarnessError::io(path, e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

/// Reads a single-column CSV of levels; a non-numeric first line is taken as a header.
pub fn read_series(path: &Path) -> Result<PathSeries64> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_series(&text).map_err(|reason| HarnessError::Parse { path: path.to_path_buf(), reason })
}

pub fn parse_series(text: &str) -> std::result::Result<PathSeries64, String> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        if field.contains(',') {
            return Err(format!("line {}: expected a single column", i + 1));
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(format!("line {}: not a number: {field:?}", i + 1)),
        }
    }
    PathSeries64::new(values, PathMeta::observed()).map_err(|e| e.to_string())
}

pub fn series_csv(values: &[f64]) -> String {
    let mut out = String::from("value\n");
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}

/// `NA` for non-finite values, shortest round-trip decimal otherwise.
pub(crate) fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "NA".to_string()
    }
}
