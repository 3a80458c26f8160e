use std::path::Path;

use multiscaling_harness::run::{read_records, records_path, REPORT_FILE};
use multiscaling_harness::tables::{table_csv, table_text};
use multiscaling_harness::{
    build_report, emit_figure_data, emit_tables, load_run, run_experiment, ExperimentConfig, HarnessError,
};

fn small_config(out: &Path, n_sims: usize, workers: usize) -> ExperimentConfig {
    let text = format!(
        r#"
[experiment]
name = "small"
n_sims = {n_sims}
length = 1024
n_fbm = 100
n_shuffle = 100
base_seed = 7
workers = {workers}
output = "{}"

[process]
kind = "rbergomi"
hurst = [0.01, 0.2]
"#,
        out.display()
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

#[test]
fn single_simulation_gives_all_or_nothing_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 1, 1);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.records.len(), 2);
    for row in &report.rows {
        assert_eq!(row.n_ok, 1);
        assert!(row.sig_pct == 0.0 || row.sig_pct == 100.0, "{}", row.sig_pct);
    }
    let csv = table_csv(&report).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn accounting_adds_up() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small_config(dir.path(), 4, 0)).unwrap();
    for row in &report.rows {
        assert_eq!(row.n_ok + row.n_failed, row.n_sims);
        assert!(row.n_reject <= row.n_ok);
        assert_eq!(row.n_distributional + row.n_temporal(), row.n_reject);
        if row.n_reject > 0 {
            assert!((row.distributional_pct + row.temporal_pct - 100.0).abs() < 1e-9);
        } else {
            assert!(row.distributional_pct.is_nan());
        }
    }
}

#[test]
fn rerun_resumes_without_recomputing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 3, 1);
    let first = run_experiment(&cfg).unwrap();

    // Drop the last record to simulate an interrupted run.
    let path = records_path(dir.path());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert_eq!(read_records(&path).unwrap().len(), 5);

    let second = run_experiment(&cfg).unwrap();
    assert_eq!(second.records, first.records);
    assert_eq!(second.rows, first.rows);
    assert_eq!(read_records(&path).unwrap().len(), 6);
}

#[test]
fn truncated_trailing_line_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 2, 1);
    run_experiment(&cfg).unwrap();
    let path = records_path(dir.path());
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"grid_index\":1,\"grid_va");
    std::fs::write(&path, text).unwrap();
    assert_eq!(read_records(&path).unwrap().len(), 4);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.records.len(), 4);
}

#[test]
fn changed_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small_config(dir.path(), 1, 1)).unwrap();
    let mut other = small_config(dir.path(), 1, 1);
    other.experiment.base_seed += 1;
    assert!(matches!(run_experiment(&other), Err(HarnessError::ConfigMismatch(_))));
    // Worker count is not part of the identity.
    run_experiment(&small_config(dir.path(), 1, 2)).unwrap();
}

#[test]
fn worker_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&small_config(a.path(), 3, 1)).unwrap();
    run_experiment(&small_config(b.path(), 3, 3)).unwrap();
    let ra = std::fs::read(a.path().join(REPORT_FILE)).unwrap();
    let rb = std::fs::read(b.path().join(REPORT_FILE)).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn tables_and_figures_from_saved_run() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small_config(dir.path(), 2, 1)).unwrap();
    let (cfg, records) = load_run(dir.path()).unwrap();
    let report = build_report(&cfg, records).unwrap();

    let tables = emit_tables(&report, dir.path()).unwrap();
    assert_eq!(tables.len(), 2);
    let csv = std::fs::read_to_string(&tables[0]).unwrap();
    assert!(csv.starts_with("H,"));
    assert_eq!(csv.lines().count(), 3);
    assert!(table_text(&report).unwrap().lines().count() >= 3);

    let figs = emit_figure_data(&report, dir.path()).unwrap();
    assert_eq!(figs.len(), 3);
    for f in figs {
        let text = std::fs::read_to_string(f).unwrap();
        assert_eq!(text.lines().next().unwrap(), "grid_point,sim_index,statistic,value");
        // two grid points, two simulations each
        assert_eq!(text.lines().count(), 5);
    }
}

#[test]
fn empty_report_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 1, 1);
    assert!(matches!(build_report(&cfg, Vec::new()), Err(HarnessError::EmptyReport)));
}
