//! Rough Bergomi log-price paths.
//!
//! The variance driver is the Riemann-Liouville process
//! `W^H_t = sqrt(2H) * int_0^t (t-s)^{H-1/2} dW_s`, whose variance is exactly
//! `t^{2H}`, built from the same Brownian increments that move the price.
//! [`simulate_rbergomi`] discretises it with the hybrid scheme (exact on the
//! most recent interval, Riemann sum with optimal evaluation points
//! elsewhere); [`simulate_rbergomi_exact`] draws the joint Gaussian vector by
//! Cholesky factorisation and serves as a cross-check for short paths.

use std::sync::Arc;

use nalgebra::DMatrix;
use quadrature::double_exponential;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{check_len, PathMeta, PathSeries, ProcessParams};
use crate::error::{invalid, Error, Result};
use crate::rng::{fill_normals, RngSpec};
use crate::scalar::Scalar;

/// Longest path accepted by the Cholesky simulator.
pub const EXACT_MAX_LEN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RBergomiParams {
    pub hurst: f64,
    /// Initial (forward) variance.
    pub xi0: f64,
    /// Volatility of volatility.
    pub eta: f64,
    /// Correlation between price and variance drivers.
    pub rho: f64,
    pub n: usize,
    /// Time step in years.
    pub dt: f64,
}

/// Default step: 10^4 observations span ten years.
pub const DEFAULT_DT: f64 = 1e-3;

impl Default for RBergomiParams {
    fn default() -> Self {
        Self { hurst: 0.1, xi0: 0.1, eta: 1.9, rho: -0.9, n: 10_000, dt: DEFAULT_DT }
    }
}

impl RBergomiParams {
    pub fn with_hurst(hurst: f64, n: usize) -> Self {
        Self { hurst, n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.0 && self.hurst <= 0.5) {
            return Err(invalid("hurst", format!("must lie in (0, 0.5], got {}", self.hurst)));
        }
        if !(self.xi0 > 0.0 && self.xi0.is_finite()) {
            return Err(invalid("xi0", format!("must be positive, got {}", self.xi0)));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta", format!("must be non-negative, got {}", self.eta)));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(invalid("rho", format!("must lie in [-1, 1], got {}", self.rho)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        check_len(self.n)
    }
}

/// Log-price path (starting at `log S_0 = 0`) and the instantaneous variance
/// on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RBergomiPath<T> {
    pub log_price: PathSeries<T>,
    pub variance: Vec<T>,
}

/// Hybrid-scheme simulator with the convolution kernel transformed once.
#[derive(Clone)]
pub struct RBergomiSimulator {
    params: RBergomiParams,
    steps: usize,
    fft_len: usize,
    kernel_hat: Vec<Complex<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    // 2x2 Cholesky factor of (dW, int (t_i - s)^a dW_s) over one step
    l11: f64,
    l21: f64,
    l22: f64,
}

impl std::fmt::Debug for RBergomiSimulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RBergomiSimulator").field("params", &self.params).finish()
    }
}

impl RBergomiSimulator {
    pub fn new(params: RBergomiParams) -> Result<Self> {
        params.validate()?;
        let a = params.hurst - 0.5;
        let dt = params.dt;
        let steps = params.n - 1;
        let fft_len = (2 * steps).next_power_of_two();

        // Riemann weights (b_k dt)^a, k >= 2, at the optimal evaluation points.
        let mut kernel = vec![Complex::new(0.0, 0.0); fft_len];
        for (k, slot) in kernel.iter_mut().enumerate().take(steps).skip(2) {
            let kf = k as f64;
            let b = ((kf.powf(a + 1.0) - (kf - 1.0).powf(a + 1.0)) / (a + 1.0)).powf(1.0 / a);
            *slot = Complex::new((b * dt).powf(a), 0.0);
        }
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);
        fwd.process(&mut kernel);

        let var_w = dt;
        let cov = dt.powf(a + 1.0) / (a + 1.0);
        let var_v = dt.powf(2.0 * a + 1.0) / (2.0 * a + 1.0);
        let l11 = var_w.sqrt();
        let l21 = cov / l11;
        let l22 = (var_v - l21 * l21).max(0.0).sqrt();

        Ok(Self { params, steps, fft_len, kernel_hat: kernel, fwd, inv, l11, l21, l22 })
    }

    pub fn params(&self) -> &RBergomiParams {
        &self.params
    }

    pub fn sample<T: Scalar>(&self, rng: RngSpec) -> Result<RBergomiPath<T>> {
        let m = self.steps;
        let mut r = rng.rng();
        let mut z = vec![0.0; 3 * m];
        fill_normals(&mut r, &mut z);
        let (z1, rest) = z.split_at(m);
        let (z2, zp) = rest.split_at(m);

        let dw: Vec<f64> = z1.iter().map(|&u| self.l11 * u).collect();
        let local: Vec<f64> =
            z1.iter().zip(z2).map(|(&u, &w)| self.l21 * u + self.l22 * w).collect();

        let mut buf: Vec<Complex<f64>> = (0..self.fft_len)
            .map(|i| Complex::new(if i < m { dw[i] } else { 0.0 }, 0.0))
            .collect();
        self.fwd.process(&mut buf);
        for (x, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *x *= *k;
        }
        self.inv.process(&mut buf);
        let norm = 1.0 / self.fft_len as f64;

        // Volterra process at t_0..t_m; W^H_0 = 0, W^H_i uses intervals 1..=i.
        let scale = (2.0 * self.params.hurst).sqrt();
        let mut volterra = vec![0.0; m + 1];
        for i in 1..=m {
            volterra[i] = scale * (local[i - 1] + buf[i].re * norm);
        }
        Ok(assemble(&self.params, &volterra, &dw, zp, rng)?)
    }
}

/// Variance from the Volterra path and the Euler log-price recursion.
fn assemble<T: Scalar>(
    p: &RBergomiParams,
    volterra: &[f64],
    dw: &[f64],
    z_perp: &[f64],
    rng: RngSpec,
) -> Result<RBergomiPath<T>> {
    let m = dw.len();
    let two_h = 2.0 * p.hurst;
    let variance: Vec<f64> = volterra
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let t = i as f64 * p.dt;
            p.xi0 * (p.eta * y - 0.5 * p.eta * p.eta * t.powf(two_h)).exp()
        })
        .collect();
    let rho_perp = (1.0 - p.rho * p.rho).max(0.0).sqrt();
    let sqrt_dt = p.dt.sqrt();
    let mut inc = Vec::with_capacity(m);
    for i in 0..m {
        let v = variance[i];
        let shock = p.rho * dw[i] + rho_perp * sqrt_dt * z_perp[i];
        inc.push(-0.5 * v * p.dt + v.sqrt() * shock);
    }
    if let Some(i) = variance.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("rough Bergomi variance at step {i}")));
    }
    let values = super::cumsum_from_zero::<T>(&inc);
    let meta = PathMeta { process: ProcessParams::RBergomi(*p), rng: Some(rng), embedding_clipped: false };
    Ok(RBergomiPath {
        log_price: PathSeries::new(values, meta)?,
        variance: variance.into_iter().map(T::lit).collect(),
    })
}

/// Hybrid-scheme rough Bergomi path.
pub fn simulate_rbergomi<T: Scalar>(params: RBergomiParams, rng: RngSpec) -> Result<RBergomiPath<T>> {
    RBergomiSimulator::new(params)?.sample(rng)
}

/// `Cov(W^H_t, W^H_s)` of the Riemann-Liouville process, by quadrature.
pub fn rl_volterra_covariance(hurst: f64, t: f64, s: f64) -> f64 {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    if lo <= 0.0 {
        return 0.0;
    }
    let a = hurst - 0.5;
    let d = hi - lo;
    if d == 0.0 {
        return lo.powf(2.0 * hurst);
    }
    // int_0^lo (d + w)^a w^a dw with w = y^m, m = 1/(a+1), which removes the
    // endpoint singularity: = m * int_0^{lo^{a+1}} (d + y^m)^a dy.
    let m = 1.0 / (a + 1.0);
    let upper = lo.powf(a + 1.0);
    let f = |y: f64| (d + y.powf(m)).powf(a);
    // Split geometrically towards zero where the integrand bends on scale d^{a+1}.
    let knee = d.powf(a + 1.0).min(upper);
    let mut total = 0.0;
    let mut hi_edge = upper;
    while hi_edge > knee * 1e-3 && hi_edge > upper * 1e-12 {
        let lo_edge = (hi_edge * 0.25).max(0.0);
        total += double_exponential::integrate(f, lo_edge, hi_edge, 1e-13).integral;
        hi_edge = lo_edge;
    }
    total += double_exponential::integrate(f, 0.0, hi_edge, 1e-13).integral;
    2.0 * hurst * m * total
}

/// `Cov(W^H_t, W_s)` for the Riemann-Liouville process driven by `W`.
fn rl_cross_covariance(hurst: f64, t: f64, s: f64) -> f64 {
    let a = hurst - 0.5;
    let u = t.min(s);
    (2.0 * hurst).sqrt() / (a + 1.0) * (t.powf(a + 1.0) - (t - u).powf(a + 1.0))
}

/// Exact sampler from the joint Gaussian law of `(W^H, W)` on the grid, with
/// the Cholesky factor computed once.
///
/// Cost is cubic in `n`; limited to [`EXACT_MAX_LEN`] samples.
#[derive(Clone)]
pub struct RBergomiExact {
    params: RBergomiParams,
    factor: DMatrix<f64>,
}

impl RBergomiExact {
    pub fn new(params: RBergomiParams) -> Result<Self> {
        params.validate()?;
        if params.n > EXACT_MAX_LEN {
            return Err(invalid("n", format!("exact simulator supports n <= {EXACT_MAX_LEN}")));
        }
        let m = params.n - 1;
        let h = params.hurst;
        let t: Vec<f64> = (1..=m).map(|i| i as f64 * params.dt).collect();
        let mut cov = DMatrix::<f64>::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..=i {
                let vv = rl_volterra_covariance(h, t[i], t[j]);
                cov[(i, j)] = vv;
                cov[(j, i)] = vv;
                let ww = t[i].min(t[j]);
                cov[(m + i, m + j)] = ww;
                cov[(m + j, m + i)] = ww;
            }
            for j in 0..m {
                let vw = rl_cross_covariance(h, t[i], t[j]);
                cov[(i, m + j)] = vw;
                cov[(m + j, i)] = vw;
            }
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::DegenerateInput("joint covariance is not positive definite".into()))?;
        Ok(Self { params, factor: chol.unpack() })
    }

    pub fn sample<T: Scalar>(&self, rng: RngSpec) -> Result<RBergomiPath<T>> {
        let m = self.params.n - 1;
        let mut r = rng.rng();
        let mut z = vec![0.0; 2 * m];
        fill_normals(&mut r, &mut z);
        let mut zp = vec![0.0; m];
        fill_normals(&mut r, &mut zp);
        let x = &self.factor * nalgebra::DVector::from_vec(z);

        let mut volterra = vec![0.0; m + 1];
        volterra[1..].copy_from_slice(&x.as_slice()[..m]);
        let w = &x.as_slice()[m..];
        let dw: Vec<f64> = (0..m).map(|i| if i == 0 { w[0] } else { w[i] - w[i - 1] }).collect();
        assemble(&self.params, &volterra, &dw, &zp, rng)
    }
}

/// One exact path; see [`RBergomiExact`].
pub fn simulate_rbergomi_exact<T: Scalar>(params: RBergomiParams, rng: RngSpec) -> Result<RBergomiPath<T>> {
    RBergomiExact::new(params)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volterra_variance_is_t_to_2h() {
        for &h in &[0.01, 0.1, 0.3, 0.5] {
            for &t in &[0.01, 0.5, 3.0] {
                let v = rl_volterra_covariance(h, t, t);
                assert!((v - t.powf(2.0 * h)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn volterra_covariance_brownian_case() {
        // H = 1/2: kernel is 1, covariance is min(s, t).
        let c = rl_volterra_covariance(0.5, 2.0, 0.7);
        assert!((c - 0.7).abs() < 1e-10, "{c}");
    }

    #[test]
    fn volterra_covariance_matches_brute_force() {
        // Midpoint rule on a fine grid away from the singularity.
        let (h, t, s) = (0.3, 1.0, 0.6);
        let a = h - 0.5;
        let n = 2_000_000;
        let du = s / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) * du;
            acc += (t - u).powf(a) * (s - u).powf(a) * du;
        }
        let brute = 2.0 * h * acc;
        let quad = rl_volterra_covariance(h, t, s);
        assert!((brute - quad).abs() < 2e-3 * quad, "brute {brute} quad {quad}");
    }

    #[test]
    fn zero_vol_of_vol_gives_constant_variance() {
        let p = RBergomiParams { eta: 0.0, ..RBergomiParams::with_hurst(0.1, 500) };
        let path: RBergomiPath<f64> = simulate_rbergomi(p, RngSpec::new(1, 0)).unwrap();
        assert!(path.variance.iter().all(|&v| (v - 0.1).abs() < 1e-15));
        assert_eq!(path.log_price.values()[0], 0.0);
    }

    #[test]
    fn variance_is_positive_and_finite() {
        let path: RBergomiPath<f64> =
            simulate_rbergomi(RBergomiParams::with_hurst(0.01, 4096), RngSpec::new(2, 0)).unwrap();
        assert!(path.variance.iter().all(|&v| v > 0.0 && v.is_finite()));
        assert_eq!(path.log_price.len(), 4096);
        assert_eq!(path.variance.len(), 4096);
    }

    #[test]
    fn rejects_invalid_params() {
        let bad = RBergomiParams { hurst: 0.6, ..RBergomiParams::default() };
        assert!(simulate_rbergomi::<f64>(bad, RngSpec::new(0, 0)).is_err());
        let bad = RBergomiParams { dt: 0.0, ..RBergomiParams::default() };
        assert!(simulate_rbergomi::<f64>(bad, RngSpec::new(0, 0)).is_err());
        let long = RBergomiParams::with_hurst(0.1, EXACT_MAX_LEN + 1);
        assert!(simulate_rbergomi_exact::<f64>(long, RngSpec::new(0, 0)).is_err());
    }
}
