//! Experiment configuration (TOML) and the named presets.

use std::path::{Path, PathBuf};

use multiscaling::hypothesis::{TestConfig, DEFAULT_ALPHA_LEVEL, DEFAULT_SURROGATES, DEFAULT_SURROGATE_FLOOR};
use multiscaling::process::{
    FbmGenerator, FbmParams, FlsmParams, MrwGenerator, MrwParams, RBergomiParams, RBergomiSimulator, DEFAULT_DT,
};
use multiscaling::rng::RngSpec;
use multiscaling::{PathSeries64, TuningConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const DEFAULT_N_SIMS: usize = 1000;
pub const DEFAULT_LENGTH: usize = 10_000;
pub const DEFAULT_SEED: u64 = 20_250_101;
/// Share of failed simulations at one grid point that aborts the run.
pub const DEFAULT_FAILURE_LIMIT: f64 = 0.05;
pub const DEFAULT_ACF_LAGS: usize = 10;

fn default_n_sims() -> usize {
    DEFAULT_N_SIMS
}
fn default_length() -> usize {
    DEFAULT_LENGTH
}
fn default_surrogates() -> usize {
    DEFAULT_SURROGATES
}
fn default_alpha_level() -> f64 {
    DEFAULT_ALPHA_LEVEL
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_floor() -> f64 {
    DEFAULT_SURROGATE_FLOOR
}
fn default_failure_limit() -> f64 {
    DEFAULT_FAILURE_LIMIT
}
fn default_acf_lags() -> usize {
    DEFAULT_ACF_LAGS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    #[serde(default = "default_n_sims")]
    pub n_sims: usize,
    /// Path length `N`.
    #[serde(default = "default_length")]
    pub length: usize,
    /// Matched-fBm surrogates `I`.
    #[serde(default = "default_surrogates")]
    pub n_fbm: usize,
    /// Shuffled surrogates `J`.
    #[serde(default = "default_surrogates")]
    pub n_shuffle: usize,
    #[serde(default = "default_alpha_level")]
    pub alpha_level: f64,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    /// 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_floor")]
    pub surrogate_floor: f64,
    #[serde(default = "default_failure_limit")]
    pub failure_limit: f64,
    #[serde(default = "default_acf_lags")]
    pub acf_lags: usize,
}

fn default_xi0() -> f64 {
    0.1
}
fn default_eta() -> f64 {
    1.9
}
fn default_rho() -> f64 {
    -0.9
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_one() -> f64 {
    1.0
}
fn default_stable_alpha() -> f64 {
    1.9
}

/// Process family with the swept parameter as a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Rbergomi {
        hurst: Vec<f64>,
        #[serde(default = "default_xi0")]
        xi0: f64,
        #[serde(default = "default_eta")]
        eta: f64,
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_dt")]
        dt: f64,
    },
    Mrw {
        lambda: Vec<f64>,
        /// Integral scale in samples; the path length when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        large_scale: Option<usize>,
        #[serde(default = "default_one")]
        sigma: f64,
    },
    Flsm {
        hurst: Vec<f64>,
        #[serde(default = "default_stable_alpha")]
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kernel_cutoff: Option<usize>,
    },
    Fbm {
        hurst: Vec<f64>,
        #[serde(default = "default_one")]
        scale: f64,
    },
}

impl ProcessSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProcessSpec::Rbergomi { .. } => "rbergomi",
            ProcessSpec::Mrw { .. } => "mrw",
            ProcessSpec::Flsm { .. } => "flsm",
            ProcessSpec::Fbm { .. } => "fbm",
        }
    }

    pub fn grid(&self) -> &[f64] {
        match self {
            ProcessSpec::Rbergomi { hurst, .. } | ProcessSpec::Flsm { hurst, .. } | ProcessSpec::Fbm { hurst, .. } => {
                hurst
            }
            ProcessSpec::Mrw { lambda, .. } => lambda,
        }
    }

    /// Column heading for the swept parameter.
    pub fn grid_label(&self) -> &'static str {
        match self {
            ProcessSpec::Mrw { .. } => "lambda",
            _ => "H",
        }
    }

    /// Simulator for one grid point, with any per-parameter set-up done once.
    pub fn simulator(&self, grid_value: f64, length: usize) -> Result<Simulator> {
        Ok(match *self {
            ProcessSpec::Rbergomi { xi0, eta, rho, dt, .. } => {
                let p = RBergomiParams { hurst: grid_value, xi0, eta, rho, n: length, dt };
                Simulator::RBergomi(RBergomiSimulator::new(p)?)
            }
            ProcessSpec::Mrw { large_scale, sigma, .. } => {
                let p = MrwParams { lambda: grid_value, large_scale: large_scale.unwrap_or(length), sigma, n: length };
                Simulator::Mrw(MrwGenerator::new(p)?)
            }
            ProcessSpec::Flsm { alpha, kernel_cutoff, .. } => {
                let p = FlsmParams { alpha, hurst: grid_value, n: length, kernel_cutoff: kernel_cutoff.unwrap_or(length) };
                p.validate()?;
                Simulator::Flsm(p)
            }
            ProcessSpec::Fbm { scale, .. } => {
                Simulator::Fbm(FbmGenerator::new(FbmParams { hurst: grid_value, n: length, scale })?)
            }
        })
    }
}

pub enum Simulator {
    RBergomi(RBergomiSimulator),
    Mrw(MrwGenerator),
    Flsm(FlsmParams),
    Fbm(FbmGenerator<f64>),
}

impl Simulator {
    /// Log-price (or level) path.
    pub fn sample(&self, rng: RngSpec) -> Result<PathSeries64> {
        Ok(match self {
            Simulator::RBergomi(s) => s.sample(rng)?.log_price,
            Simulator::Mrw(g) => g.sample(rng),
            Simulator::Flsm(p) => multiscaling::process::simulate_flsm(*p, rng)?,
            Simulator::Fbm(g) => g.sample(rng),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub process: ProcessSpec,
    #[serde(default)]
    pub tuning: TuningConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Parse { path: path.to_path_buf(), reason: m },
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        let bad = |m: String| Err(HarnessError::Config(m));
        if e.n_sims == 0 {
            return bad("n_sims must be >= 1".into());
        }
        if self.process.grid().is_empty() {
            return bad("parameter grid is empty".into());
        }
        if self.process.grid().iter().any(|v| !v.is_finite()) {
            return bad("parameter grid has non-finite values".into());
        }
        if !(e.failure_limit >= 0.0 && e.failure_limit < 1.0) {
            return bad(format!("failure_limit must lie in [0, 1), got {}", e.failure_limit));
        }
        if e.acf_lags < DEFAULT_ACF_LAGS {
            return bad(format!("acf_lags must be >= {DEFAULT_ACF_LAGS}"));
        }
        let as_config = |err: HarnessError| match err {
            HarnessError::Core(c) => HarnessError::Config(c.to_string()),
            other => other,
        };
        self.test_config().validate().map_err(|c| HarnessError::Config(c.to_string()))?;
        for &g in self.process.grid() {
            self.process.simulator(g, e.length.min(64).max(2)).map(|_| ()).map_err(as_config)?;
        }
        Ok(())
    }

    pub fn test_config(&self) -> TestConfig {
        TestConfig {
            alpha_level: self.experiment.alpha_level,
            n_fbm: self.experiment.n_fbm,
            n_shuffle: self.experiment.n_shuffle,
            surrogate_floor: self.experiment.surrogate_floor,
            tuning: self.tuning.clone(),
        }
    }
}

pub const PRESETS: [&str; 6] =
    ["rbergomi-table1", "rbergomi-table2", "rbergomi-full", "rbergomi-intro", "mrw-table3", "flsm-table4"];

fn rbergomi(hurst: &[f64]) -> ProcessSpec {
    ProcessSpec::Rbergomi { hurst: hurst.to_vec(), xi0: 0.1, eta: 1.9, rho: -0.9, dt: DEFAULT_DT }
}

/// Built-in configurations at full Monte Carlo scale.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let process = match name {
        "rbergomi-table1" => rbergomi(&[0.001, 0.005, 0.01]),
        "rbergomi-table2" => rbergomi(&[0.05, 0.1, 0.2]),
        "rbergomi-full" => rbergomi(&[0.001, 0.005, 0.01, 0.05, 0.1, 0.2]),
        "rbergomi-intro" => rbergomi(&[0.05, 0.1, 0.2, 0.3]),
        "mrw-table3" => ProcessSpec::Mrw { lambda: vec![0.05, 0.15, 0.25], large_scale: None, sigma: 1.0 },
        "flsm-table4" => ProcessSpec::Flsm { hurst: vec![0.1, 0.5, 0.9], alpha: 1.9, kernel_cutoff: None },
        _ => return Err(HarnessError::Config(format!("unknown preset {name:?}; known: {}", PRESETS.join(", ")))),
    };
    Ok(ExperimentConfig {
        experiment: ExperimentSection {
            name: name.to_string(),
            n_sims: DEFAULT_N_SIMS,
            length: DEFAULT_LENGTH,
            n_fbm: DEFAULT_SURROGATES,
            n_shuffle: DEFAULT_SURROGATES,
            alpha_level: DEFAULT_ALPHA_LEVEL,
            base_seed: DEFAULT_SEED,
            workers: 0,
            output: PathBuf::from("out").join(name),
            surrogate_floor: DEFAULT_SURROGATE_FLOOR,
            failure_limit: DEFAULT_FAILURE_LIMIT,
            acf_lags: DEFAULT_ACF_LAGS,
        },
        process,
        tuning: TuningConfig::default(),
    })
}
