//! Long-format CSV data for figures; no plotting.

use std::path::{Path, PathBuf};

use multiscaling::process::{RBergomiParams, RBergomiSimulator};
use multiscaling::rng::{derive_seed, RngSpec};

use crate::error::{HarnessError, Result};
use crate::io::{fmt_num, write_atomic};
use crate::report::ExperimentReport;

/// Representative roughness values for the path/return/volatility traces.
pub const FIGURE1_HURST: [f64; 3] = [0.05, 0.1, 0.2];

fn per_simulation(report: &ExperimentReport, statistic: &str, value: impl Fn(&crate::report::SimulationRecord) -> Option<f64>) -> String {
    let mut out = String::from("grid_point,sim_index,statistic,value\n");
    for r in report.records.iter().filter(|r| r.is_ok()) {
        if let Some(v) = value(r) {
            out.push_str(&format!("{},{},{statistic},{}\n", fmt_num(r.grid_value), r.sim_index, fmt_num(v)));
        }
    }
    out
}

/// `fig2_b.csv`, `fig3_kurtosis.csv` and `fig4_vol_clustering.csv` under `figures/`.
pub fn emit_figure_data(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if report.rows.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let dir = out_dir.join("figures");
    let bundles = [
        ("fig2_b.csv", per_simulation(report, "B", |r| r.verdict.as_ref().map(|v| v.b_original))),
        ("fig3_kurtosis.csv", per_simulation(report, "kurtosis", |r| r.diagnostics.as_ref().map(|d| d.kurtosis))),
        (
            "fig4_vol_clustering.csv",
            per_simulation(report, "vol_clustering", |r| r.diagnostics.as_ref().map(|d| d.vol_clustering)),
        ),
    ];
    let mut paths = Vec::new();
    for (name, body) in bundles {
        let p = dir.join(name);
        write_atomic(&p, body.as_bytes())?;
        paths.push(p);
    }
    Ok(paths)
}

/// Price `S_t`, discrete return `S_t - S_{t-1}` and volatility `sqrt(v_t)`
/// for one rBergomi path per Hurst value, as `grid_point,t,series,value`.
pub fn figure1_csv(hurst: &[f64], base: RBergomiParams, seed: u64) -> Result<String> {
    let mut out = String::from("grid_point,t,series,value\n");
    for (g, &h) in hurst.iter().enumerate() {
        let sim = RBergomiSimulator::new(RBergomiParams { hurst: h, ..base })?;
        let path = sim.sample::<f64>(RngSpec::new(derive_seed(seed, g as u64, 0), 0))?;
        let price: Vec<f64> = path.log_price.values().iter().map(|x| x.exp()).collect();
        let gp = fmt_num(h);
        for (t, p) in price.iter().enumerate() {
            out.push_str(&format!("{gp},{t},price,{}\n", fmt_num(*p)));
        }
        for t in 1..price.len() {
            out.push_str(&format!("{gp},{t},return,{}\n", fmt_num(price[t] - price[t - 1])));
        }
        for (t, v) in path.variance.iter().enumerate() {
            out.push_str(&format!("{gp},{t},vol,{}\n", fmt_num(v.sqrt())));
        }
    }
    Ok(out)
}

pub fn emit_figure1(hurst: &[f64], base: RBergomiParams, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    let p = out_dir.join("figures").join("fig1_paths.csv");
    write_atomic(&p, figure1_csv(hurst, base, seed)?.as_bytes())?;
    Ok(p)
}
