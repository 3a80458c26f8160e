//! Fractional Levy stable motion as a truncated moving average of symmetric
//! alpha-stable noise.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{check_len, PathMeta, PathSeries, ProcessParams};
use crate::error::{invalid, Result};
use crate::rng::{check_alpha, stable_draw, RngSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlsmParams {
    pub alpha: f64,
    pub hurst: f64,
    pub n: usize,
    /// Number of kernel taps, `g_0..g_{cutoff-1}`.
    pub kernel_cutoff: usize,
}

impl FlsmParams {
    /// Full causal history: `kernel_cutoff = n`.
    pub fn new(alpha: f64, hurst: f64, n: usize) -> Self {
        Self { alpha, hurst, n, kernel_cutoff: n }
    }

    /// Memory exponent `d = H - 1/alpha`.
    pub fn memory_exponent(&self) -> f64 {
        self.hurst - 1.0 / self.alpha
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(invalid("hurst", format!("must lie in (0, 1), got {}", self.hurst)));
        }
        let d = self.memory_exponent();
        if d <= -1.0 {
            return Err(invalid("hurst", format!("memory exponent H - 1/alpha = {d} must exceed -1")));
        }
        if self.kernel_cutoff < 1 {
            return Err(invalid("kernel_cutoff", "must be >= 1"));
        }
        check_len(self.n)
    }
}

/// Kernel taps `g_0 = 1`, `g_j = (j+1)^d - j^d`.
pub fn flsm_kernel(d: f64, cutoff: usize) -> Vec<f64> {
    (0..cutoff)
        .map(|j| if j == 0 { 1.0 } else { (j as f64 + 1.0).powf(d) - (j as f64).powf(d) })
        .collect()
}

/// Moving-average generator; the transformed kernel is built once.
pub struct FlsmGenerator<T: Scalar> {
    params: FlsmParams,
    /// `None` when the kernel is the identity (`d = 0` or a single tap).
    conv: Option<Convolver<T>>,
}

struct Convolver<T: Scalar> {
    len: usize,
    kernel_hat: Vec<Complex<T>>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> FlsmGenerator<T> {
    pub fn new(params: FlsmParams) -> Result<Self> {
        params.validate()?;
        let d = params.memory_exponent();
        let taps = params.kernel_cutoff;
        let conv = if taps == 1 || d == 0.0 {
            None
        } else {
            let m = params.n - 1;
            let len = (m + 2 * (taps - 1)).next_power_of_two();
            let mut planner = FftPlanner::<T>::new();
            let fwd = planner.plan_fft_forward(len);
            let inv = planner.plan_fft_inverse(len);
            let g = flsm_kernel(d, taps);
            let mut kernel_hat: Vec<Complex<T>> = (0..len)
                .map(|i| Complex::new(if i < taps { T::lit(g[i]) } else { T::zero() }, T::zero()))
                .collect();
            fwd.process(&mut kernel_hat);
            Some(Convolver { len, kernel_hat, fwd, inv })
        };
        Ok(Self { params, conv })
    }

    pub fn params(&self) -> &FlsmParams {
        &self.params
    }

    pub fn sample_increments(&self, rng: RngSpec) -> Vec<T> {
        let m = self.params.n - 1;
        let taps = self.params.kernel_cutoff;
        let mut r = rng.rng();
        match &self.conv {
            None => (0..m).map(|_| T::lit(stable_draw(&mut r, self.params.alpha))).collect(),
            Some(c) => {
                // taps - 1 pre-sample innovations give every increment its full history.
                let noise_len = m + taps - 1;
                let mut buf: Vec<Complex<T>> = (0..c.len)
                    .map(|i| {
                        let z = if i < noise_len { stable_draw(&mut r, self.params.alpha) } else { 0.0 };
                        Complex::new(T::lit(z), T::zero())
                    })
                    .collect();
                c.fwd.process(&mut buf);
                for (x, k) in buf.iter_mut().zip(&c.kernel_hat) {
                    *x = *x * *k;
                }
                c.inv.process(&mut buf);
                let norm = T::one() / T::from_count(c.len);
                (0..m).map(|k| buf[k + taps - 1].re * norm).collect()
            }
        }
    }

    pub fn sample(&self, rng: RngSpec) -> PathSeries<T> {
        let inc = self.sample_increments(rng);
        let meta = PathMeta { process: ProcessParams::Flsm(self.params), rng: Some(rng), embedding_clipped: false };
        PathSeries::from_increments(T::zero(), &inc, meta).expect("finite FLSM path")
    }
}

type CacheKey = (TypeId, u64, u64, usize, usize);
type Cache = RwLock<HashMap<CacheKey, Arc<dyn Any + Send + Sync>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cached_generator<T: Scalar>(params: FlsmParams) -> Result<Arc<FlsmGenerator<T>>> {
    let key = (TypeId::of::<T>(), params.alpha.to_bits(), params.hurst.to_bits(), params.n, params.kernel_cutoff);
    if let Some(hit) = cache().read().expect("flsm cache poisoned").get(&key) {
        if let Ok(g) = hit.clone().downcast::<FlsmGenerator<T>>() {
            return Ok(g);
        }
    }
    let g = Arc::new(FlsmGenerator::<T>::new(params)?);
    cache().write().expect("flsm cache poisoned").insert(key, g.clone());
    Ok(g)
}

/// FLSM path; kernels are cached per parameter set and shared across threads.
pub fn simulate_flsm<T: Scalar>(params: FlsmParams, rng: RngSpec) -> Result<PathSeries<T>> {
    Ok(cached_generator::<T>(params)?.sample(rng))
}
