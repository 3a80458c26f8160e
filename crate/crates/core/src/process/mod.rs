//! Path simulators: fractional Brownian motion, rough Bergomi, multifractal
//! random walk and fractional Levy stable motion.
//!
//! Every simulator is a pure function of its parameter record and an
//! [`RngSpec`]. Internal arithmetic runs in `f64`; the output path is
//! converted to the requested scalar type.

mod fbm;
mod flsm;
mod mrw;
mod rbergomi;

pub use fbm::{fgn_autocovariance, simulate_fbm, FbmGenerator, FbmParams};
pub use flsm::{flsm_kernel, simulate_flsm, FlsmGenerator, FlsmParams};
pub use mrw::{simulate_mrw, MrwGenerator, MrwParams};
pub use rbergomi::{
    rl_volterra_covariance, simulate_rbergomi, simulate_rbergomi_exact, RBergomiParams,
    RBergomiExact, RBergomiPath, RBergomiSimulator, DEFAULT_DT, EXACT_MAX_LEN,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSpec;
use crate::scalar::Scalar;

/// Parameter record of the process that produced a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessParams {
    Fbm(FbmParams),
    RBergomi(RBergomiParams),
    Mrw(MrwParams),
    Flsm(FlsmParams),
    /// Reconstructed from permuted increments of another path.
    Shuffled,
    /// Loaded from external data.
    Observed,
}

impl ProcessParams {
    pub fn kind(&self) -> &'static str {
        match self {
            ProcessParams::Fbm(_) => "fbm",
            ProcessParams::RBergomi(_) => "rbergomi",
            ProcessParams::Mrw(_) => "mrw",
            ProcessParams::Flsm(_) => "flsm",
            ProcessParams::Shuffled => "shuffled",
            ProcessParams::Observed => "observed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub process: ProcessParams,
    pub rng: Option<RngSpec>,
    /// Set when circulant eigenvalues had to be clipped at zero.
    #[serde(default)]
    pub embedding_clipped: bool,
}

impl PathMeta {
    pub fn observed() -> Self {
        Self { process: ProcessParams::Observed, rng: None, embedding_clipped: false }
    }
}

/// A discretely observed trajectory (log-price or process level).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PathSeries<T> {
    values: Vec<T>,
    pub meta: PathMeta,
}

impl<T: Scalar> PathSeries<T> {
    pub fn new(values: Vec<T>, meta: PathMeta) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a path needs at least 2 values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("path value at index {i}")));
        }
        Ok(Self { values, meta })
    }

    /// Wraps externally supplied levels.
    pub fn observed(values: Vec<T>) -> Result<Self> {
        Self::new(values, PathMeta::observed())
    }

    /// Rebuilds a path from `start` and a sequence of increments.
    pub fn from_increments(start: T, increments: &[T], meta: PathMeta) -> Result<Self> {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut x = start;
        values.push(x);
        for &d in increments {
            x = x + d;
            values.push(x);
        }
        Self::new(values, meta)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First differences `X_t - X_{t-1}`.
    pub fn increments(&self) -> Vec<T> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub(crate) fn cumsum_from_zero<T: Scalar>(increments: &[f64]) -> Vec<T> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut x = 0.0f64;
    out.push(T::zero());
    for &d in increments {
        x += d;
        out.push(T::lit(x));
    }
    out
}

pub(crate) fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(crate::error::invalid("n", format!("path length must be >= 2, got {n}")));
    }
    Ok(())
}
