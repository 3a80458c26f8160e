use serde::{Deserialize, Serialize};

use super::{check_len, PathMeta, PathSeries, ProcessParams};
use crate::circulant::CirculantSampler;
use crate::error::{invalid, Result};
use crate::rng::RngSpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmParams {
    pub hurst: f64,
    /// Number of samples in the path (increments are `n - 1`).
    pub n: usize,
    /// Standard deviation of a lag-1 increment.
    pub scale: f64,
}

impl FbmParams {
    pub fn new(hurst: f64, n: usize) -> Self {
        Self { hurst, n, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(invalid("hurst", format!("must lie in (0, 1), got {}", self.hurst)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(invalid("scale", format!("must be positive, got {}", self.scale)));
        }
        check_len(self.n)
    }
}

/// Autocovariance of fractional Gaussian noise at lag `k`:
/// `scale^2 / 2 * (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})`.
pub fn fgn_autocovariance(hurst: f64, scale: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    let km1 = (k - 1.0).abs();
    0.5 * scale * scale * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + km1.powf(h2))
}

/// Davies-Harte generator with the embedding factored once, for drawing many
/// paths with the same parameters.
#[derive(Debug, Clone)]
pub struct FbmGenerator<T: Scalar> {
    params: FbmParams,
    sampler: CirculantSampler<T>,
}

impl<T: Scalar> FbmGenerator<T> {
    pub fn new(params: FbmParams) -> Result<Self> {
        params.validate()?;
        let (h, s) = (params.hurst, params.scale);
        let sampler = CirculantSampler::new(params.n - 1, |k| fgn_autocovariance(h, s, k))?;
        Ok(Self { params, sampler })
    }

    pub fn params(&self) -> &FbmParams {
        &self.params
    }

    pub fn clipped(&self) -> bool {
        self.sampler.clipped()
    }

    /// Stationary fractional Gaussian noise of length `n - 1`.
    pub fn sample_increments(&self, rng: RngSpec) -> Vec<T> {
        self.sampler.sample(&mut rng.rng())
    }

    /// fBm path starting at zero.
    pub fn sample(&self, rng: RngSpec) -> PathSeries<T> {
        let inc = self.sample_increments(rng);
        let meta = PathMeta {
            process: ProcessParams::Fbm(self.params),
            rng: Some(rng),
            embedding_clipped: self.sampler.clipped(),
        };
        PathSeries::from_increments(T::zero(), &inc, meta).expect("finite fBm path")
    }
}

pub fn simulate_fbm<T: Scalar>(params: FbmParams, rng: RngSpec) -> Result<PathSeries<T>> {
    Ok(FbmGenerator::new(params)?.sample(rng))
}
