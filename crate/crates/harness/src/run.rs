//! Monte Carlo driver: (grid point, simulation) jobs on a worker pool, one
//! writer appending JSON lines, deterministic aggregation afterwards.

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use multiscaling::descriptives::diagnostics;
use multiscaling::hypothesis::run_two_stage;
use multiscaling::rng::{derive_seed, RngSpec};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Simulator};
use crate::error::{HarnessError, Result};
use crate::io::write_atomic;
use crate::report::{build_report, report_csv, ExperimentReport, SimulationRecord};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const CONFIG_FILE: &str = "config.toml";
pub const REPORT_FILE: &str = "report.csv";

pub fn records_path(dir: &Path) -> PathBuf {
    dir.join(RECORDS_FILE)
}

/// Parses a records file, skipping a truncated final line.
pub fn read_records(path: &Path) -> Result<Vec<SimulationRecord>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(HarnessError::io(path, e)),
    };
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => {
                return Err(HarnessError::Parse { path: path.to_path_buf(), reason: format!("line {}: {e}", i + 1) })
            }
        }
    }
    Ok(out)
}

/// Loads the saved configuration and records of a finished or partial run.
pub fn load_run(dir: &Path) -> Result<(ExperimentConfig, Vec<SimulationRecord>)> {
    let cfg = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
    Ok((cfg, read_records(&records_path(dir))?))
}

/// One simulation through the full pipeline; failures become error records.
pub fn run_job(config: &ExperimentConfig, sim: &Simulator, grid_index: usize, sim_index: usize) -> SimulationRecord {
    let e = &config.experiment;
    let seed = derive_seed(e.base_seed, grid_index as u64, sim_index as u64);
    let rng = RngSpec::new(seed, 0);
    let mut record = SimulationRecord {
        grid_index,
        grid_value: config.process.grid()[grid_index],
        sim_index,
        seed,
        verdict: None,
        diagnostics: None,
        error: None,
    };
    let outcome = (|| -> Result<_> {
        let path = sim.sample(rng)?;
        let diag = diagnostics(&path.increments(), e.acf_lags)?;
        let verdict = run_two_stage(&path, &config.test_config(), rng)?;
        Ok((verdict, diag))
    })();
    match outcome {
        Ok((v, d)) => {
            record.verdict = Some(v);
            record.diagnostics = Some(d);
        }
        Err(err) => record.error = Some(err.to_string()),
    }
    record
}

fn prepare_output(config: &ExperimentConfig, dir: &Path) -> Result<Vec<SimulationRecord>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let cfg_path = dir.join(CONFIG_FILE);
    if cfg_path.exists() {
        let saved = ExperimentConfig::load(&cfg_path)?;
        if !same_experiment(&saved, config) {
            return Err(HarnessError::ConfigMismatch(dir.to_path_buf()));
        }
    }
    write_atomic(&cfg_path, config.to_toml().as_bytes())?;
    let rec_path = records_path(dir);
    let existing = read_records(&rec_path)?;
    // Rewrite without any truncated tail before appending.
    let mut text = String::new();
    for r in &existing {
        text.push_str(&serde_json::to_string(r).expect("record serialises"));
        text.push('\n');
    }
    write_atomic(&rec_path, text.as_bytes())?;
    Ok(existing)
}

/// Worker count and output location may change between resumed runs.
fn same_experiment(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    let mut a = a.clone();
    a.experiment.workers = b.experiment.workers;
    a.experiment.output = b.experiment.output.clone();
    a == *b
}

fn worker_count(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Runs (or resumes) an experiment and writes `records.jsonl`, `config.toml`
/// and `report.csv` under the configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let e = &config.experiment;
    let dir = e.output.clone();
    let existing = prepare_output(config, &dir)?;
    let done: HashSet<(usize, usize)> = existing.iter().map(|r| (r.grid_index, r.sim_index)).collect();

    let grid = config.process.grid();
    let simulators = grid.iter().map(|&g| config.process.simulator(g, e.length)).collect::<Result<Vec<_>>>()?;
    let limit = (e.failure_limit * e.n_sims as f64).floor() as usize;
    let failures: Vec<AtomicUsize> = (0..grid.len())
        .map(|g| AtomicUsize::new(existing.iter().filter(|r| r.grid_index == g && !r.is_ok()).count()))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..e.n_sims).map(move |s| (g, s)))
        .filter(|j| !done.contains(j))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(e.workers))
        .build()
        .map_err(|err| HarnessError::Config(format!("worker pool: {err}")))?;

    let rec_path = records_path(&dir);
    let file = OpenOptions::new().append(true).open(&rec_path).map_err(|err| HarnessError::io(&rec_path, err))?;
    let (tx, rx) = mpsc::channel::<SimulationRecord>();
    let writer = std::thread::spawn(move || -> std::io::Result<Vec<SimulationRecord>> {
        let mut out = BufWriter::new(file);
        let mut written = Vec::new();
        for r in rx {
            serde_json::to_writer(&mut out, &r)?;
            out.write_all(b"\n")?;
            out.flush()?;
            written.push(r);
        }
        out.get_ref().sync_all()?;
        Ok(written)
    });

    pool.install(|| {
        jobs.par_iter().for_each_with(tx, |tx, &(g, s)| {
            if failures[g].load(Ordering::Relaxed) > limit {
                return;
            }
            let record = run_job(config, &simulators[g], g, s);
            if !record.is_ok() {
                failures[g].fetch_add(1, Ordering::Relaxed);
            }
            let _ = tx.send(record);
        })
    });
    let new = writer
        .join()
        .expect("writer thread")
        .map_err(|err| HarnessError::io(&rec_path, err))?;

    let mut records = existing;
    records.extend(new);
    for (g, &value) in grid.iter().enumerate() {
        let failed: Vec<&SimulationRecord> = records.iter().filter(|r| r.grid_index == g && !r.is_ok()).collect();
        if failed.len() > limit {
            let mut first = failed.clone();
            first.sort_by_key(|r| r.sim_index);
            return Err(HarnessError::GridPointAborted {
                grid_value: value,
                failed: failed.len(),
                n_sims: e.n_sims,
                limit,
                first_error: first[0].error.clone().unwrap_or_default(),
            });
        }
    }
    let report = build_report(config, records)?;
    write_atomic(&dir.join(REPORT_FILE), report_csv(&report).as_bytes())?;
    Ok(report)
}
