//! Summary tables: grid value, Sig, Distributional, Temporal, Mean B, SD(B).

use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::io::write_atomic;
use crate::report::{ExperimentReport, GridSummary};

fn pct1(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.1}")
    } else {
        "NA".into()
    }
}

fn b4(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        "NA".into()
    }
}

pub fn table_header(label: &str) -> [String; 6] {
    [label.to_string(), "Sig (%)".into(), "Distributional (%)".into(), "Temporal (%)".into(), "Mean B".into(), "SD(B)".into()]
}

pub fn table_row(r: &GridSummary) -> [String; 6] {
    [
        format!("{:.3}", r.grid_value),
        pct1(r.sig_pct),
        pct1(r.distributional_pct),
        pct1(r.temporal_pct),
        b4(r.mean_b),
        b4(r.sd_b),
    ]
}

pub fn table_csv(report: &ExperimentReport) -> Result<String> {
    if report.rows.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let mut out = table_header(report.config.process.grid_label()).join(",");
    out.push('\n');
    for r in &report.rows {
        out.push_str(&table_row(r).join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn table_text(report: &ExperimentReport) -> Result<String> {
    if report.rows.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let header = table_header(report.config.process.grid_label());
    let rows: Vec<[String; 6]> = report.rows.iter().map(table_row).collect();
    let widths: Vec<usize> =
        (0..6).map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap()).collect();
    let line = |cells: &[String; 6]| {
        let mut s = format!("{:<w$}", cells[0], w = widths[0]);
        for c in 1..6 {
            s.push_str(&format!("  {:>w$}", cells[c], w = widths[c]));
        }
        s.push('\n');
        s
    };
    let mut out = line(&header);
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 10));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r));
    }
    Ok(out)
}

/// Writes `tables/<name>.csv` and `tables/<name>.txt`; returns both paths.
pub fn emit_tables(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let name = &report.config.experiment.name;
    let dir = out_dir.join("tables");
    let csv = dir.join(format!("{name}.csv"));
    let txt = dir.join(format!("{name}.txt"));
    write_atomic(&csv, table_csv(report)?.as_bytes())?;
    write_atomic(&txt, table_text(report)?.as_bytes())?;
    Ok(vec![csv, txt])
}
