//! Multifractal random walk: Gaussian increments modulated by the exponential
//! of a log-correlated Gaussian field.

use serde::{Deserialize, Serialize};

use super::{check_len, PathMeta, PathSeries, ProcessParams};
use crate::circulant::CirculantSampler;
use crate::error::{invalid, Result};
use crate::rng::{fill_normals, RngSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrwParams {
    /// Intermittency coefficient; `lambda^2` scales the log-covariance.
    pub lambda: f64,
    /// Integral (decorrelation) scale in samples.
    pub large_scale: usize,
    /// Standard deviation of the Gaussian factor.
    pub sigma: f64,
    pub n: usize,
}

impl MrwParams {
    /// `L = n`, `sigma = 1`.
    pub fn new(lambda: f64, n: usize) -> Self {
        Self { lambda, large_scale: n, sigma: 1.0, n }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        check_len(self.n)?;
        if self.large_scale <= 1 || self.large_scale > self.n {
            return Err(invalid(
                "large_scale",
                format!("must satisfy 1 < L <= n, got L = {} with n = {}", self.large_scale, self.n),
            ));
        }
        Ok(())
    }

    /// `Cov(omega_i, omega_j)` at lag `k = |i - j|`.
    pub fn log_covariance(&self, k: usize) -> f64 {
        let l = self.large_scale as f64;
        self.lambda * self.lambda * (l / (k as f64 + 1.0)).ln().max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct MrwGenerator {
    params: MrwParams,
    /// `None` when `lambda = 0` (no cascade).
    field: Option<CirculantSampler<f64>>,
    mean: f64,
}

impl MrwGenerator {
    pub fn new(params: MrwParams) -> Result<Self> {
        params.validate()?;
        let field = if params.lambda > 0.0 {
            Some(CirculantSampler::new(params.n - 1, |k| params.log_covariance(k))?)
        } else {
            None
        };
        let mean = -params.lambda * params.lambda * (params.large_scale as f64).ln();
        Ok(Self { params, field, mean })
    }

    pub fn sample<T: Scalar>(&self, rng: RngSpec) -> PathSeries<T> {
        let m = self.params.n - 1;
        let mut r = rng.rng();
        let mut eps = vec![0.0; m];
        fill_normals(&mut r, &mut eps);
        let omega = match &self.field {
            Some(f) => f.sample(&mut r),
            None => vec![0.0; m],
        };
        let inc: Vec<f64> = eps
            .iter()
            .zip(&omega)
            .map(|(&e, &w)| self.params.sigma * e * (w + self.mean).exp())
            .collect();
        let meta = PathMeta {
            process: ProcessParams::Mrw(self.params),
            rng: Some(rng),
            embedding_clipped: self.field.as_ref().is_some_and(|f| f.clipped()),
        };
        PathSeries::new(super::cumsum_from_zero(&inc), meta).expect("finite MRW path")
    }
}

pub fn simulate_mrw<T: Scalar>(params: MrwParams, rng: RngSpec) -> Result<PathSeries<T>> {
    Ok(MrwGenerator::new(params)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_is_truncated_log() {
        let p = MrwParams::new(0.2, 100);
        assert!((p.log_covariance(0) - 0.04 * 100f64.ln()).abs() < 1e-15);
        assert_eq!(p.log_covariance(99), 0.0);
        assert_eq!(p.log_covariance(500), 0.0);
    }

    #[test]
    fn unit_lag_energy_is_normalised() {
        // E[exp(2 omega)] = 1, so E[dX^2] = sigma^2.
        let g = MrwGenerator::new(MrwParams::new(0.25, 4096)).unwrap();
        let mut acc = 0.0;
        let mut cnt = 0.0;
        for s in 0..40 {
            let p: PathSeries<f64> = g.sample(RngSpec::new(s, 0));
            for d in p.increments() {
                acc += d * d;
                cnt += 1.0;
            }
        }
        let e2 = acc / cnt;
        assert!((e2 - 1.0).abs() < 0.1, "E[dX^2] = {e2}");
    }

    #[test]
    fn rejects_bad_scale() {
        let p = MrwParams { large_scale: 1, ..MrwParams::new(0.1, 100) };
        assert!(simulate_mrw::<f64>(p, RngSpec::new(0, 0)).is_err());
        let p = MrwParams { large_scale: 101, ..MrwParams::new(0.1, 100) };
        assert!(simulate_mrw::<f64>(p, RngSpec::new(0, 0)).is_err());
    }
}
