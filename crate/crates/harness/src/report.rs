//! Aggregation of per-simulation records into grid-point summaries.

use multiscaling::hypothesis::{Classification, TestVerdict};
use multiscaling::DiagnosticsRecord64;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::io::fmt_num;

/// Outcome of one simulate -> test -> diagnose job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub grid_index: usize,
    pub grid_value: f64,
    pub sim_index: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<TestVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsRecord64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SimulationRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.verdict.is_some() && self.diagnostics.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub grid_value: f64,
    pub n_sims: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    pub n_reject: usize,
    pub n_distributional: usize,
    pub n_temporal_enhancing: usize,
    pub n_temporal_reducing: usize,
    /// Stage-1 rejections as a share of successful simulations.
    pub sig_pct: f64,
    /// Shares among rejections; `NaN` when nothing was rejected.
    pub distributional_pct: f64,
    pub temporal_pct: f64,
    pub mean_b: f64,
    pub sd_b: f64,
    pub kurtosis_quartiles: [f64; 3],
    pub vol_clustering_quartiles: [f64; 3],
}

impl GridSummary {
    pub fn n_temporal(&self) -> usize {
        self.n_temporal_enhancing + self.n_temporal_reducing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<GridSummary>,
    /// Every record, ordered by grid point then simulation.
    pub records: Vec<SimulationRecord>,
}

/// Linear-interpolation quantile of a sorted sample.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn quartiles(mut xs: Vec<f64>) -> [f64; 3] {
    xs.sort_by(f64::total_cmp);
    [quantile(&xs, 0.25), quantile(&xs, 0.5), quantile(&xs, 0.75)]
}

fn pct(count: usize, total: usize) -> f64 {
    if total == 0 {
        f64::NAN
    } else {
        100.0 * count as f64 / total as f64
    }
}

pub fn summarize(grid_value: f64, n_sims: usize, records: &[&SimulationRecord]) -> GridSummary {
    let ok: Vec<&SimulationRecord> = records.iter().copied().filter(|r| r.is_ok()).collect();
    let verdicts: Vec<&TestVerdict> = ok.iter().filter_map(|r| r.verdict.as_ref()).collect();
    let count = |c: Classification| verdicts.iter().filter(|v| v.classification == c).count();
    let n_reject = verdicts.iter().filter(|v| v.stage1.reject).count();
    let n_distributional = count(Classification::Distributional);
    let n_temporal = count(Classification::TemporalEnhancing) + count(Classification::TemporalReducing);

    let bs: Vec<f64> = verdicts.iter().map(|v| v.b_original).collect();
    let mean_b = if bs.is_empty() { f64::NAN } else { bs.iter().sum::<f64>() / bs.len() as f64 };
    let sd_b = if bs.len() < 2 {
        f64::NAN
    } else {
        (bs.iter().map(|b| (b - mean_b).powi(2)).sum::<f64>() / (bs.len() - 1) as f64).sqrt()
    };
    let diag: Vec<&DiagnosticsRecord64> = ok.iter().filter_map(|r| r.diagnostics.as_ref()).collect();

    GridSummary {
        grid_value,
        n_sims,
        n_ok: ok.len(),
        n_failed: records.len() - ok.len(),
        n_reject,
        n_distributional,
        n_temporal_enhancing: count(Classification::TemporalEnhancing),
        n_temporal_reducing: count(Classification::TemporalReducing),
        sig_pct: pct(n_reject, ok.len()),
        distributional_pct: pct(n_distributional, n_reject),
        temporal_pct: pct(n_temporal, n_reject),
        mean_b,
        sd_b,
        kurtosis_quartiles: quartiles(diag.iter().map(|d| d.kurtosis).collect()),
        vol_clustering_quartiles: quartiles(diag.iter().map(|d| d.vol_clustering).collect()),
    }
}

/// Groups sorted records by grid point and summarises each.
pub fn build_report(config: &ExperimentConfig, mut records: Vec<SimulationRecord>) -> Result<ExperimentReport> {
    records.sort_by_key(|r| (r.grid_index, r.sim_index));
    records.dedup_by_key(|r| (r.grid_index, r.sim_index));
    let rows = config
        .process
        .grid()
        .iter()
        .enumerate()
        .map(|(g, &value)| {
            let mine: Vec<&SimulationRecord> = records.iter().filter(|r| r.grid_index == g).collect();
            summarize(value, config.experiment.n_sims, &mine)
        })
        .filter(|row| row.n_ok + row.n_failed > 0)
        .collect::<Vec<_>>();
    if rows.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    Ok(ExperimentReport { config: config.clone(), rows, records })
}

pub const REPORT_COLUMNS: [&str; 21] = [
    "grid_label",
    "grid_value",
    "n_sims",
    "n_ok",
    "n_failed",
    "n_reject",
    "n_distributional",
    "n_temporal_enhancing",
    "n_temporal_reducing",
    "sig_pct",
    "distributional_pct",
    "temporal_pct",
    "mean_b",
    "sd_b",
    "kurtosis_q1",
    "kurtosis_median",
    "kurtosis_q3",
    "vol_clustering_q1",
    "vol_clustering_median",
    "vol_clustering_q3",
    "process",
];

/// Aggregate CSV, one row per grid point.
pub fn report_csv(report: &ExperimentReport) -> String {
    let label = report.config.process.grid_label();
    let kind = report.config.process.kind();
    let mut out = REPORT_COLUMNS.join(",");
    out.push('\n');
    for r in &report.rows {
        let mut fields = vec![
            label.to_string(),
            fmt_num(r.grid_value),
            r.n_sims.to_string(),
            r.n_ok.to_string(),
            r.n_failed.to_string(),
            r.n_reject.to_string(),
            r.n_distributional.to_string(),
            r.n_temporal_enhancing.to_string(),
            r.n_temporal_reducing.to_string(),
        ];
        fields.extend([r.sig_pct, r.distributional_pct, r.temporal_pct, r.mean_b, r.sd_b].map(fmt_num));
        fields.extend(r.kurtosis_quartiles.map(fmt_num));
        fields.extend(r.vol_clustering_quartiles.map(fmt_num));
        fields.push(kind.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        assert_eq!(quartiles(vec![4.0, 1.0, 3.0, 2.0, 5.0]), [2.0, 3.0, 4.0]);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn no_rejections_give_missing_shares() {
        let s = summarize(0.1, 0, &[]);
        assert!(s.distributional_pct.is_nan());
        assert!(s.sig_pct.is_nan());
    }
}
