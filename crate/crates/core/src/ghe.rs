//! Generalised Hurst exponent estimation.
//!
//! Raw moments `Xi(tau, q)` of non-overlapping increments are normalised by
//! their unit-lag value and raised to `1/q`, so that the standardised moments
//! scale as `tau^{H(q)}` and pass through 1 at `tau = 1`. `H(q)` is then the
//! slope of a no-intercept regression in log-log space, and the multiscaling
//! proxy `B` is the slope of the weighted line `H(q) = A + B q`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::process::PathSeries;
use crate::scalar::Scalar;

/// Lower bound on `sigma_{H(q)}` so that weights stay finite for exact fits.
pub const HQ_SE_FLOOR: f64 = 1e-12;

/// Moment estimates on a `(tau, q)` grid, stored row-major by lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MomentGrid<T> {
    taus: Vec<usize>,
    qs: Vec<T>,
    xi: Vec<T>,
    standardized: bool,
}

impl<T: Scalar> MomentGrid<T> {
    /// Builds a grid from explicit values (`xi[tau_index][q_index]`).
    pub fn from_rows(taus: Vec<usize>, qs: Vec<T>, rows: Vec<Vec<T>>, standardized: bool) -> Result<Self> {
        check_taus(&taus)?;
        check_qs(&qs)?;
        if rows.len() != taus.len() || rows.iter().any(|r| r.len() != qs.len()) {
            return Err(invalid("xi", "row/column count does not match the grid"));
        }
        let xi: Vec<T> = rows.into_iter().flatten().collect();
        if xi.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(invalid("xi", "moment estimates must be finite and non-negative"));
        }
        Ok(Self { taus, qs, xi, standardized })
    }

    pub fn taus(&self) -> &[usize] {
        &self.taus
    }

    pub fn qs(&self) -> &[T] {
        &self.qs
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn get(&self, tau_index: usize, q_index: usize) -> T {
        self.xi[tau_index * self.qs.len() + q_index]
    }

    pub fn row(&self, tau_index: usize) -> &[T] {
        let nq = self.qs.len();
        &self.xi[tau_index * nq..(tau_index + 1) * nq]
    }

    /// Leading `count` lags.
    pub fn truncate_taus(&self, count: usize) -> Self {
        let count = count.min(self.taus.len());
        Self {
            taus: self.taus[..count].to_vec(),
            qs: self.qs.clone(),
            xi: self.xi[..count * self.qs.len()].to_vec(),
            standardized: self.standardized,
        }
    }
}

fn check_taus(taus: &[usize]) -> Result<()> {
    if taus.is_empty() || taus[0] < 1 || taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("taus", "lags must be strictly increasing and >= 1"));
    }
    Ok(())
}

fn check_qs<T: Scalar>(qs: &[T]) -> Result<()> {
    if qs.is_empty() || !(qs[0] > T::zero()) || qs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("qs", "moment orders must be strictly increasing and > 0"));
    }
    if qs.iter().any(|q| !q.is_finite()) {
        return Err(invalid("qs", "moment orders must be finite"));
    }
    Ok(())
}

/// True when `qs[k] = (k + 1) * qs[0]`, which lets `|d|^q` be built by
/// repeated multiplication.
fn is_ladder<T: Scalar>(qs: &[T]) -> bool {
    let step = qs[0];
    qs.iter().enumerate().all(|(k, &q)| {
        let target = step * T::from_count(k + 1);
        (q - target).abs() <= T::lit(1e-9) * target
    })
}

/// Raw structure function of a path.
pub fn structure_function<T: Scalar>(path: &PathSeries<T>, taus: &[usize], qs: &[T]) -> Result<MomentGrid<T>> {
    structure_function_of(path.values(), taus, qs)
}

/// `Xi(tau, q) = mean_i |X((i+1) tau) - X(i tau)|^q` over the
/// `floor(len / tau) - 1` non-overlapping increments starting at index 0.
pub fn structure_function_of<T: Scalar>(values: &[T], taus: &[usize], qs: &[T]) -> Result<MomentGrid<T>> {
    check_taus(taus)?;
    check_qs(qs)?;
    let len = values.len();
    let max_tau = *taus.last().expect("non-empty");
    if 2 * max_tau > len {
        return Err(invalid("taus", format!("largest lag {max_tau} needs a path of length >= {}", 2 * max_tau)));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("path values".into()));
    }
    let nq = qs.len();
    let ladder = is_ladder(qs);
    let mut xi = vec![T::zero(); taus.len() * nq];
    let mut acc = vec![T::zero(); nq];
    for (ti, &tau) in taus.iter().enumerate() {
        let count = len / tau - 1;
        acc.iter_mut().for_each(|a| *a = T::zero());
        for i in 0..count {
            let a = (values[(i + 1) * tau] - values[i * tau]).abs();
            if ladder {
                let base = a.powf(qs[0]);
                let mut p = base;
                for slot in acc.iter_mut() {
                    *slot = *slot + p;
                    p = p * base;
                }
            } else {
                for (slot, &q) in acc.iter_mut().zip(qs) {
                    *slot = *slot + a.powf(q);
                }
            }
        }
        let inv = T::one() / T::from_count(count);
        for (qi, &s) in acc.iter().enumerate() {
            let v = s * inv;
            if !(v > T::zero()) {
                return Err(Error::DegenerateInput(format!(
                    "zero moment at tau = {tau}, q = {} (constant path segment)",
                    qs[qi]
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("moment at tau = {tau}, q = {}", qs[qi])));
            }
            xi[ti * nq + qi] = v;
        }
    }
    Ok(MomentGrid { taus: taus.to_vec(), qs: qs.to_vec(), xi, standardized: false })
}

/// `(Xi(tau, q) / Xi(1, q))^{1/q}`.
pub fn normalize_standardize<T: Scalar>(grid: &MomentGrid<T>) -> Result<MomentGrid<T>> {
    let unit = grid.taus.iter().position(|&t| t == 1).ok_or(Error::MissingUnitLag)?;
    let base = grid.row(unit).to_vec();
    if base.iter().any(|b| !(*b > T::zero())) {
        return Err(Error::DegenerateInput("zero moment at tau = 1".into()));
    }
    let nq = grid.qs.len();
    let xi = grid
        .xi
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let qi = k % nq;
            if k / nq == unit {
                T::one()
            } else {
                (v / base[qi]).powf(T::one() / grid.qs[qi])
            }
        })
        .collect();
    Ok(MomentGrid { taus: grid.taus.clone(), qs: grid.qs.clone(), xi, standardized: true })
}

/// Scaling exponent at one moment order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HqEstimate<T> {
    pub q: T,
    pub hq: T,
    pub hq_se: T,
    pub r2: T,
}

/// No-intercept least squares of `log Xi_std(tau, q)` on `log tau` for each q.
///
/// `sigma_{H(q)}` uses `n - 1` degrees of freedom; `R^2` is uncentred.
pub fn fit_hq<T: Scalar>(grid: &MomentGrid<T>) -> Result<Vec<HqEstimate<T>>> {
    if !grid.standardized {
        return Err(invalid("grid", "fit_hq expects a standardised moment grid"));
    }
    let n = grid.taus.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("need >= 3 lags, got {n}")));
    }
    let x: Vec<T> = grid.taus.iter().map(|&t| T::from_count(t).ln()).collect();
    let sxx: T = x.iter().map(|&v| v * v).sum();
    let dof = T::from_count(n - 1);
    let floor = T::lit(HQ_SE_FLOOR);
    let out = grid
        .qs
        .iter()
        .enumerate()
        .map(|(qi, &q)| {
            let y: Vec<T> = (0..n).map(|ti| grid.get(ti, qi).ln()).collect();
            let sxy: T = x.iter().zip(&y).map(|(&a, &b)| a * b).sum();
            let h = sxy / sxx;
            let ssr: T = x.iter().zip(&y).map(|(&a, &b)| (b - h * a).powi(2)).sum();
            let syy: T = y.iter().map(|&b| b * b).sum();
            let se = (ssr / (dof * sxx)).sqrt().max(floor);
            let r2 = if syy > T::zero() { (T::one() - ssr / syy).max(T::zero()).min(T::one()) } else { T::one() };
            HqEstimate { q, hq: h, hq_se: se, r2 }
        })
        .collect();
    Ok(out)
}

/// Ordinary regression with intercept on the raw grid:
/// `H(q) = cov(log tau, log Xi) / (q var(log tau))`, `n - 2` degrees of
/// freedom, centred `R^2`. Diagnostic only.
pub fn fit_hq_with_intercept<T: Scalar>(raw: &MomentGrid<T>) -> Result<Vec<HqEstimate<T>>> {
    let n = raw.taus.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("need >= 3 lags, got {n}")));
    }
    let nf = T::from_count(n);
    let x: Vec<T> = raw.taus.iter().map(|&t| T::from_count(t).ln()).collect();
    let xbar = x.iter().copied().sum::<T>() / nf;
    let sxx: T = x.iter().map(|&v| (v - xbar).powi(2)).sum();
    Ok(raw
        .qs
        .iter()
        .enumerate()
        .map(|(qi, &q)| {
            let y: Vec<T> = (0..n).map(|ti| raw.get(ti, qi).ln()).collect();
            let ybar = y.iter().copied().sum::<T>() / nf;
            let sxy: T = x.iter().zip(&y).map(|(&a, &b)| (a - xbar) * (b - ybar)).sum();
            let slope = sxy / sxx;
            let icpt = ybar - slope * xbar;
            let ssr: T = x.iter().zip(&y).map(|(&a, &b)| (b - slope * a - icpt).powi(2)).sum();
            let syy: T = y.iter().map(|&b| (b - ybar).powi(2)).sum();
            let se = (ssr / T::from_count(n - 2) / (q * q * sxx)).sqrt();
            let r2 = if syy > T::zero() { T::one() - ssr / syy } else { T::one() };
            HqEstimate { q, hq: slope / q, hq_se: se, r2 }
        })
        .collect())
}

/// Weighted line `H(q) = A + B q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScalingFit<T> {
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
    #[serde(rename = "B_se")]
    pub b_se: T,
}

/// WLS fit with weights `1 / sigma_{H(q)}^2`.
pub fn fit_multiscaling_proxy<T: Scalar>(records: &[HqEstimate<T>]) -> Result<ScalingFit<T>> {
    let pts: Vec<(T, T, T)> = records
        .iter()
        .filter_map(|r| {
            let w = T::one() / (r.hq_se * r.hq_se);
            (w.is_finite() && w > T::zero() && r.hq.is_finite()).then_some((r.q, r.hq, w))
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData("need >= 2 moment orders with finite weights".into()));
    }
    fit_weighted_line(&pts)
}

/// Closed-form WLS through `(q, h, w)` triples. Weights are rescaled by their
/// maximum before solving; the reported `sigma_B` refers to the original
/// weights.
pub fn fit_weighted_line<T: Scalar>(pts: &[(T, T, T)]) -> Result<ScalingFit<T>> {
    let wmax = pts.iter().map(|p| p.2).fold(T::zero(), T::max);
    if !(wmax > T::zero()) || !wmax.is_finite() {
        return Err(invalid("weights", "must be positive and finite"));
    }
    let (mut s, mut sq, mut sqq, mut sh, mut sqh) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for &(q, h, w) in pts {
        let w = w / wmax;
        s = s + w;
        sq = sq + w * q;
        sqq = sqq + w * q * q;
        sh = sh + w * h;
        sqh = sqh + w * q * h;
    }
    let qmin = pts.iter().map(|p| p.0).fold(T::infinity(), T::min);
    let qmax = pts.iter().map(|p| p.0).fold(T::neg_infinity(), T::max);
    let det = s * sqq - sq * sq;
    if qmax == qmin || !(det > T::zero()) {
        return Err(Error::Collinear);
    }
    let b = (s * sqh - sq * sh) / det;
    let a = (sqq * sh - sq * sqh) / det;
    let b_se = (s / det).sqrt() / wmax.sqrt();
    Ok(ScalingFit { a, b, b_se })
}

/// Estimated `H(q)` curve with its weighted linear summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GheResult<T> {
    pub per_q: Vec<HqEstimate<T>>,
    /// Present iff at least two moment orders were fitted.
    #[serde(flatten)]
    pub fit: Option<ScalingFit<T>>,
    pub taus: Vec<usize>,
}

impl<T: Scalar> GheResult<T> {
    pub fn b(&self) -> Option<T> {
        self.fit.map(|f| f.b)
    }

    /// `H(q)` at the grid point closest to `q` (within 1e-6).
    pub fn h_at(&self, q: T) -> Option<T> {
        self.per_q.iter().find(|r| (r.q - q).abs() < T::lit(1e-6)).map(|r| r.hq)
    }

    pub fn qs(&self) -> Vec<T> {
        self.per_q.iter().map(|r| r.q).collect()
    }

    pub fn min_r2(&self) -> T {
        self.per_q.iter().map(|r| r.r2).fold(T::infinity(), T::min)
    }
}

/// Full pipeline on a path: moments, standardisation, `H(q)` and the proxy fit.
pub fn estimate_ghe<T: Scalar>(path: &PathSeries<T>, taus: &[usize], qs: &[T]) -> Result<GheResult<T>> {
    estimate_ghe_of(path.values(), taus, qs)
}

pub fn estimate_ghe_of<T: Scalar>(values: &[T], taus: &[usize], qs: &[T]) -> Result<GheResult<T>> {
    let raw = structure_function_of(values, taus, qs)?;
    ghe_from_grid(&raw)
}

/// Standardises a raw grid and fits it.
pub fn ghe_from_grid<T: Scalar>(raw: &MomentGrid<T>) -> Result<GheResult<T>> {
    let std = normalize_standardize(raw)?;
    let per_q = fit_hq(&std)?;
    let fit = if per_q.len() >= 2 { Some(fit_multiscaling_proxy(&per_q)?) } else { None };
    Ok(GheResult { per_q, fit, taus: raw.taus.clone() })
}

/// `1..=tau_max`.
pub fn unit_lag_range(tau_max: usize) -> Vec<usize> {
    (1..=tau_max).collect()
}

/// `{step, 2 step, ...}` up to the largest multiple of `step` not above `q_max`.
pub fn q_ladder<T: Scalar>(step: f64, q_max: f64) -> Vec<T> {
    let count = (q_max / step + 1e-9).floor().max(0.0) as usize;
    // Round to 12 decimals so that e.g. 3 * 0.1 prints as 0.3.
    (1..=count).map(|k| T::lit((k as f64 * step * 1e12).round() / 1e12)).collect()
}
