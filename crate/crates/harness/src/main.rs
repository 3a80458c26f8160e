use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multiscaling::descriptives::diagnostics;
use multiscaling::hypothesis::{original_fit, run_two_stage_tuned};
use multiscaling::process::RBergomiParams;
use multiscaling::rng::{derive_seed, RngSpec};
use multiscaling::{tune, GheResult64, TuningResult};
use multiscaling_harness::config::{preset, ExperimentConfig, DEFAULT_ACF_LAGS, DEFAULT_SEED};
use multiscaling_harness::figures::{emit_figure1, FIGURE1_HURST};
use multiscaling_harness::io::{read_series, series_csv, write_atomic};
use multiscaling_harness::run::{load_run, REPORT_FILE};
use multiscaling_harness::{build_report, emit_figure_data, emit_tables, run_experiment, HarnessError, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "multiscaling", version, about = "Multiscaling detection and source attribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Base seed (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Source {
    /// TOML experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration name.
    #[arg(long)]
    preset: Option<String>,
    /// Simulations per grid point.
    #[arg(long)]
    sims: Option<usize>,
    /// Path length.
    #[arg(long)]
    length: Option<usize>,
    /// Matched-fBm surrogates.
    #[arg(long = "I")]
    i: Option<usize>,
    /// Shuffled surrogates.
    #[arg(long = "J")]
    j: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write simulated paths as single-column CSV files.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
        /// Paths per grid point.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Tune and fit the generalised Hurst exponents of a series.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the two-stage surrogate test on a series.
    Test {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "I", default_value_t = 1000)]
        i: usize,
        #[arg(long = "J", default_value_t = 1000)]
        j: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run a Monte Carlo experiment and write report, tables and figure data.
    Experiment {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild tables from an experiment directory.
    Tables {
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild figure data from an experiment directory.
    Figures {
        #[command(flatten)]
        common: Common,
        /// Also write rBergomi path/return/volatility traces.
        #[arg(long)]
        paths: bool,
        /// Length of the traces.
        #[arg(long, default_value_t = 10_000)]
        length: usize,
    },
}

fn load_config(source: &Source, common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match (&source.config, &source.preset) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(HarnessError::Config("one of --config or --preset is required".into())),
    };
    let e = &mut cfg.experiment;
    if let Some(v) = common.seed {
        e.base_seed = v;
    }
    if let Some(v) = common.workers {
        e.workers = v;
    }
    if let Some(v) = &common.out {
        e.output = v.clone();
    }
    if let Some(v) = source.sims {
        e.n_sims = v;
    }
    if let Some(v) = source.length {
        e.length = v;
    }
    if let Some(v) = source.i {
        e.n_fbm = v;
    }
    if let Some(v) = source.j {
        e.n_shuffle = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_pool(workers: Option<usize>) {
    if let Some(n) = workers.filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn out_dir(common: &Common) -> Result<&Path> {
    common.out.as_deref().ok_or_else(|| HarnessError::Config("--out is required".into()))
}

/// Stdout line that tolerates a closed pipe.
fn emit(line: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn print_json<T: Serialize>(value: &T) {
    emit(serde_json::to_string(value).expect("serialisable output"));
}

#[derive(Serialize)]
struct Analysis {
    #[serde(flatten)]
    ghe: GheResult64,
    h1: f64,
    tuning: TuningResult,
    diagnostics: multiscaling::DiagnosticsRecord64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { source, common, count } => {
            let cfg = load_config(&source, &common)?;
            let dir = cfg.experiment.output.join("paths");
            for (g, &value) in cfg.process.grid().iter().enumerate() {
                let sim = cfg.process.simulator(value, cfg.experiment.length)?;
                for s in 0..count {
                    let seed = derive_seed(cfg.experiment.base_seed, g as u64, s as u64);
                    let path = sim.sample(RngSpec::new(seed, 0))?;
                    let file = dir.join(format!("{}_{value}_{s}.csv", cfg.process.kind()));
                    write_atomic(&file, series_csv(path.values()).as_bytes())?;
                    emit(file.display());
                }
            }
        }
        Command::Analyze { input, common } => {
            init_pool(common.workers);
            let path = read_series(&input)?;
            let tuning = tune(&path, &Default::default())?;
            let (ghe, h1) = original_fit(&path, &tuning)?;
            let diagnostics = diagnostics(&path.increments(), DEFAULT_ACF_LAGS)?;
            print_json(&Analysis { ghe, h1, tuning, diagnostics });
        }
        Command::Test { input, i, j, alpha, common } => {
            init_pool(common.workers);
            let path = read_series(&input)?;
            let cfg = multiscaling::TestConfig { alpha_level: alpha, n_fbm: i, n_shuffle: j, ..Default::default() };
            cfg.validate()?;
            let tuning = tune(&path, &cfg.tuning)?;
            let verdict = run_two_stage_tuned(&path, tuning, &cfg, RngSpec::new(common.seed.unwrap_or(DEFAULT_SEED), 0))?;
            print_json(&verdict);
            if let Some(out) = &common.out {
                let body = serde_json::to_string_pretty(&verdict).expect("verdict serialises");
                write_atomic(&out.join("verdict.json"), body.as_bytes())?;
            }
        }
        Command::Experiment { source, common } => {
            let cfg = load_config(&source, &common)?;
            let report = run_experiment(&cfg)?;
            let dir = &cfg.experiment.output;
            emit_tables(&report, dir)?;
            emit_figure_data(&report, dir)?;
            eprintln!("{}", multiscaling_harness::tables::table_text(&report)?);
            emit(dir.join(REPORT_FILE).display());
        }
        Command::Tables { common } => {
            let dir = out_dir(&common)?;
            let (cfg, records) = load_run(dir)?;
            for p in emit_tables(&build_report(&cfg, records)?, dir)? {
                emit(p.display());
            }
        }
        Command::Figures { common, paths, length } => {
            let dir = out_dir(&common)?;
            if dir.join("config.toml").exists() {
                let (cfg, records) = load_run(dir)?;
                for p in emit_figure_data(&build_report(&cfg, records)?, dir)? {
                    emit(p.display());
                }
            } else if !paths {
                return Err(HarnessError::Config(format!("{} holds no experiment; pass --paths for traces", dir.display())));
            }
            if paths {
                let base = RBergomiParams { n: length, ..RBergomiParams::default() };
                let p = emit_figure1(&FIGURE1_HURST, base, common.seed.unwrap_or(DEFAULT_SEED), dir)?;
                emit(p.display());
            }
        }
    }
    Ok(())
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_line("usage", e.render().to_string().trim()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
