//! Data-driven choice of the moment range (via the tail index) and of the
//! largest lag (via the worst-case log-log fit quality across moments).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ghe::{fit_hq, normalize_standardize, q_ladder, structure_function_of, unit_lag_range};
use crate::process::PathSeries;
use crate::scalar::Scalar;
use crate::stable::{alpha_from_ratio, stable_pdf, upper_quartile, TABLE_MAX_ALPHA, TABLE_MIN_ALPHA};

pub const DEFAULT_SAFETY: f64 = 0.8;
pub const DEFAULT_R2_THRESHOLD: f64 = 0.98;
pub const DEFAULT_Q_STEP: f64 = 0.1;
/// Below this many observations the tail estimate falls back to [`FALLBACK_ALPHA`].
pub const MIN_TAIL_OBS: usize = 500;
pub const FALLBACK_ALPHA: f64 = 1.25;
pub const MIN_Q_POINTS: usize = 5;
pub const Q_MAX_CLAMP: (f64, f64) = (0.5, 2.0);
pub const DEFAULT_TAU_CANDIDATES: [usize; 11] = [5, 10, 15, 20, 30, 50, 75, 100, 150, 200, 250];

/// Tail-index estimate with provenance flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub alpha: f64,
    /// Sample `(x95 - x05) / (x75 - x25)`; `NaN` under the fallback.
    pub quantile_ratio: f64,
    /// Too few observations: conservative default used.
    pub fallback: bool,
    pub ml_refined: bool,
}

fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// McCulloch quantile estimate of the stability index, clamped to [0.5, 2].
pub fn estimate_tail_index<T: Scalar>(returns: &[T]) -> Result<TailEstimate> {
    estimate_tail_index_with(returns, false)
}

/// As [`estimate_tail_index`], optionally refined by maximising the stable
/// likelihood over a coarse grid around the quantile estimate.
pub fn estimate_tail_index_with<T: Scalar>(returns: &[T], refine_ml: bool) -> Result<TailEstimate> {
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("returns passed to the tail estimator".into()));
    }
    if returns.len() < MIN_TAIL_OBS {
        return Ok(TailEstimate { alpha: FALLBACK_ALPHA, quantile_ratio: f64::NAN, fallback: true, ml_refined: false });
    }
    let mut sorted: Vec<f64> = returns.iter().map(|r| r.to_f64_lossy()).collect();
    sorted.sort_by(f64::total_cmp);
    let iqr = sample_quantile(&sorted, 0.75) - sample_quantile(&sorted, 0.25);
    if !(iqr > 0.0) {
        return Err(Error::DegenerateInput("returns have zero interquartile range".into()));
    }
    let nu = (sample_quantile(&sorted, 0.95) - sample_quantile(&sorted, 0.05)) / iqr;
    let alpha = alpha_from_ratio(nu).clamp(TABLE_MIN_ALPHA, TABLE_MAX_ALPHA);
    if !refine_ml {
        return Ok(TailEstimate { alpha, quantile_ratio: nu, fallback: false, ml_refined: false });
    }
    let median = sample_quantile(&sorted, 0.5);
    let refined = refine_by_likelihood(&sorted, median, iqr, alpha);
    Ok(TailEstimate { alpha: refined, quantile_ratio: nu, fallback: false, ml_refined: true })
}

/// Log-likelihood over `alpha_0 +- 0.1` in steps of 0.02; scale from the
/// interquartile range under each candidate alpha.
fn refine_by_likelihood(sorted: &[f64], location: f64, iqr: f64, alpha0: f64) -> f64 {
    const GRID_HALF: i32 = 5;
    const GRID_STEP: f64 = 0.02;
    let mut best = (f64::NEG_INFINITY, alpha0);
    for k in -GRID_HALF..=GRID_HALF {
        let a = alpha0 + k as f64 * GRID_STEP;
        if !(TABLE_MIN_ALPHA..=TABLE_MAX_ALPHA).contains(&a) {
            continue;
        }
        let scale = iqr / (2.0 * upper_quartile(a));
        let table = DensityTable::new(a);
        let ll: f64 = sorted.iter().map(|&x| table.log_pdf((x - location) / scale) - scale.ln()).sum();
        if ll > best.0 {
            best = (ll, a);
        }
    }
    best.1
}

/// Log-density on an `asinh`-spaced grid with a power-law tail beyond it.
struct DensityTable {
    alpha: f64,
    u_max: f64,
    log_f: Vec<f64>,
}

impl DensityTable {
    const POINTS: usize = 400;
    const X_MAX: f64 = 1e4;

    fn new(alpha: f64) -> Self {
        let u_max = Self::X_MAX.asinh();
        let log_f = (0..Self::POINTS)
            .map(|i| {
                let x = (u_max * i as f64 / (Self::POINTS - 1) as f64).sinh();
                stable_pdf(alpha, x).max(f64::MIN_POSITIVE).ln()
            })
            .collect();
        Self { alpha, u_max, log_f }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax >= Self::X_MAX {
            // f(x) ~ alpha c x^{-alpha-1}
            let last = self.log_f[Self::POINTS - 1];
            return last - (self.alpha + 1.0) * (ax / Self::X_MAX).ln();
        }
        let pos = ax.asinh() / self.u_max * (Self::POINTS - 1) as f64;
        let i = (pos.floor() as usize).min(Self::POINTS - 2);
        let w = pos - i as f64;
        self.log_f[i] * (1.0 - w) + self.log_f[i + 1] * w
    }
}

/// Moment orders admitted by a tail index.
#[derive(Debug, Clone, PartialEq)]
pub struct QRange<T> {
    /// `s * alpha`; the grid stops at the largest step multiple below it.
    pub q_max: f64,
    pub qs: Vec<T>,
}

/// `{step, 2 step, ...} <= s * alpha`.
pub fn select_q_range<T: Scalar>(alpha: f64, safety: f64) -> Result<QRange<T>> {
    select_q_range_with_step(alpha, safety, DEFAULT_Q_STEP)
}

pub fn select_q_range_with_step<T: Scalar>(alpha: f64, safety: f64, step: f64) -> Result<QRange<T>> {
    if !(TABLE_MIN_ALPHA..=TABLE_MAX_ALPHA).contains(&alpha) {
        return Err(invalid("alpha", format!("must lie in [0.5, 2], got {alpha}")));
    }
    let q_max = safety * alpha;
    Ok(QRange { q_max, qs: q_grid(q_max, step)? })
}

fn q_grid<T: Scalar>(q_max: f64, step: f64) -> Result<Vec<T>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("q_step", format!("must be positive, got {step}")));
    }
    let qs = q_ladder(step, q_max);
    if qs.len() < MIN_Q_POINTS {
        return Err(invalid(
            "q_max",
            format!("q grid up to {q_max} with step {step} has {} points, need >= {MIN_Q_POINTS}", qs.len()),
        ));
    }
    Ok(qs)
}

/// Default lag candidates restricted to `[5, n / 10]`.
pub fn default_tau_candidates(n: usize) -> Vec<usize> {
    DEFAULT_TAU_CANDIDATES.iter().copied().filter(|&t| t >= 5 && t <= n / 10).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauCandidate {
    pub tau_max: usize,
    pub r2_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauSelection {
    pub tau_max: usize,
    pub candidates: Vec<TauCandidate>,
    /// No candidate reached the threshold; `tau_max` is the best-fitting one.
    pub below_threshold: bool,
}

/// Largest candidate whose worst `R^2(q)` over `qs` meets `threshold`.
pub fn select_tau_max<T: Scalar>(
    path: &PathSeries<T>,
    qs: &[T],
    candidates: &[usize],
    threshold: f64,
) -> Result<TauSelection> {
    let len = path.len();
    if candidates.is_empty() {
        return Err(invalid("tau_candidates", "empty candidate list"));
    }
    if candidates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("tau_candidates", "must be strictly increasing"));
    }
    if candidates[0] < 5 || *candidates.last().unwrap() > len / 10 {
        return Err(invalid(
            "tau_candidates",
            format!("each candidate must lie in [5, {}] for a path of length {len}", len / 10),
        ));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid("threshold", format!("must lie in (0, 1), got {threshold}")));
    }
    let largest = *candidates.last().unwrap();
    let raw = structure_function_of(path.values(), &unit_lag_range(largest), qs)?;
    let mut scored = Vec::with_capacity(candidates.len());
    for &c in candidates {
        let std = normalize_standardize(&raw.truncate_taus(c))?;
        let r2_min = fit_hq(&std)?.iter().map(|r| r.r2.to_f64_lossy()).fold(f64::INFINITY, f64::min);
        scored.push(TauCandidate { tau_max: c, r2_min });
    }
    let passing = scored.iter().rev().find(|c| c.r2_min >= threshold);
    Ok(match passing {
        Some(c) => TauSelection { tau_max: c.tau_max, candidates: scored, below_threshold: false },
        None => {
            let best = scored
                .iter()
                .fold(scored[0], |b, c| if c.r2_min > b.r2_min { *c } else { b });
            TauSelection { tau_max: best.tau_max, candidates: scored, below_threshold: true }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningConfig {
    pub safety: f64,
    pub threshold: f64,
    /// `None` selects [`default_tau_candidates`].
    pub tau_candidates: Option<Vec<usize>>,
    pub q_step: f64,
    pub refine_tail_ml: bool,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            safety: DEFAULT_SAFETY,
            threshold: DEFAULT_R2_THRESHOLD,
            tau_candidates: None,
            q_step: DEFAULT_Q_STEP,
            refine_tail_ml: false,
        }
    }
}

/// Hyperparameters chosen for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub alpha_stable: f64,
    pub alpha_safe: f64,
    pub safety: f64,
    pub q_max: f64,
    pub q_step: f64,
    pub tau_max: usize,
    pub tau_candidates: Vec<TauCandidate>,
    pub threshold: f64,
    pub below_threshold: bool,
    pub tail_fallback: bool,
}

impl TuningResult {
    pub fn qs<T: Scalar>(&self) -> Vec<T> {
        q_ladder(self.q_step, self.q_max)
    }

    pub fn taus(&self) -> Vec<usize> {
        unit_lag_range(self.tau_max)
    }
}

/// Tail index -> q grid -> lag range, all from the series itself.
pub fn tune<T: Scalar>(path: &PathSeries<T>, cfg: &TuningConfig) -> Result<TuningResult> {
    if !(cfg.safety > 0.0 && cfg.safety <= 1.0) {
        return Err(invalid("safety", format!("must lie in (0, 1], got {}", cfg.safety)));
    }
    let tail = estimate_tail_index_with(&path.increments(), cfg.refine_tail_ml)?;
    let alpha_safe = cfg.safety * tail.alpha;
    let q_max = alpha_safe.clamp(Q_MAX_CLAMP.0, Q_MAX_CLAMP.1);
    let qs: Vec<T> = q_grid(q_max, cfg.q_step)?;
    let candidates = match &cfg.tau_candidates {
        Some(c) => c.iter().copied().filter(|&t| t >= 5 && t <= path.len() / 10).collect(),
        None => default_tau_candidates(path.len()),
    };
    if candidates.is_empty() {
        return Err(Error::InsufficientData(format!(
            "path of length {} admits no lag candidate in [5, n/10]",
            path.len()
        )));
    }
    let sel = select_tau_max(path, &qs, &candidates, cfg.threshold)?;
    Ok(TuningResult {
        alpha_stable: tail.alpha,
        alpha_safe,
        safety: cfg.safety,
        q_max,
        q_step: cfg.q_step,
        tau_max: sel.tau_max,
        tau_candidates: sel.candidates,
        threshold: cfg.threshold,
        below_threshold: sel.below_threshold,
        tail_fallback: tail.fallback,
    })
}
