//! Return diagnostics: raw kurtosis, autocorrelation of absolute returns and
//! the volatility-clustering sum.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Lags summed by [`vol_clustering`].
pub const CLUSTERING_LAGS: usize = 10;

/// Neumaier-compensated sum, so that order-permuted inputs agree closely.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

fn to_f64<T: Scalar>(xs: &[T]) -> Result<Vec<f64>> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let v = x.to_f64_lossy();
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite(format!("return at index {i}")))
            }
        })
        .collect()
}

/// `m4 / m2^2` with population central moments.
pub fn kurtosis<T: Scalar>(returns: &[T]) -> Result<T> {
    if returns.len() < 4 {
        return Err(Error::InsufficientData(format!("kurtosis needs >= 4 returns, got {}", returns.len())));
    }
    let r = to_f64(returns)?;
    let n = r.len() as f64;
    let mean = compensated_sum(r.iter().copied()) / n;
    let m2 = compensated_sum(r.iter().map(|x| (x - mean).powi(2))) / n;
    if !(m2 > 0.0) {
        return Err(Error::DegenerateInput("constant returns have undefined kurtosis".into()));
    }
    let m4 = compensated_sum(r.iter().map(|x| (x - mean).powi(4))) / n;
    Ok(T::lit(m4 / (m2 * m2)))
}

/// Biased sample autocorrelation of `|r_t|` at lags `1..=max_lag`.
pub fn acf_abs_returns<T: Scalar>(returns: &[T], max_lag: usize) -> Result<Vec<T>> {
    if max_lag == 0 {
        return Err(invalid("max_lag", "must be >= 1"));
    }
    if returns.len() <= max_lag + 1 {
        return Err(Error::InsufficientData(format!(
            "acf up to lag {max_lag} needs more than {} returns, got {}",
            max_lag + 1,
            returns.len()
        )));
    }
    let a: Vec<f64> = to_f64(returns)?.into_iter().map(f64::abs).collect();
    let n = a.len() as f64;
    let mean = compensated_sum(a.iter().copied()) / n;
    let c: Vec<f64> = a.iter().map(|x| x - mean).collect();
    let c0 = compensated_sum(c.iter().map(|x| x * x)) / n;
    if !(c0 > 0.0) {
        return Err(Error::DegenerateInput("absolute returns are constant".into()));
    }
    Ok((1..=max_lag)
        .map(|k| {
            let ck = compensated_sum(c[..c.len() - k].iter().zip(&c[k..]).map(|(x, y)| x * y)) / n;
            T::lit(ck / c0)
        })
        .collect())
}

/// Sum of the first ten absolute-return autocorrelations.
pub fn vol_clustering<T: Scalar>(returns: &[T]) -> Result<T> {
    Ok(acf_abs_returns(returns, CLUSTERING_LAGS)?.into_iter().fold(T::zero(), |s, x| s + x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DiagnosticsRecord<T> {
    pub kurtosis: T,
    pub acf_abs: Vec<T>,
    pub vol_clustering: T,
    pub n: usize,
}

/// All diagnostics for one return series; `max_lag` must be at least 10.
pub fn diagnostics<T: Scalar>(returns: &[T], max_lag: usize) -> Result<DiagnosticsRecord<T>> {
    if max_lag < CLUSTERING_LAGS {
        return Err(invalid("max_lag", format!("must be >= {CLUSTERING_LAGS}, got {max_lag}")));
    }
    let acf_abs = acf_abs_returns(returns, max_lag)?;
    let vol_clustering = acf_abs[..CLUSTERING_LAGS].iter().fold(T::zero(), |s, &x| s + x);
    Ok(DiagnosticsRecord { kurtosis: kurtosis(returns)?, acf_abs, vol_clustering, n: returns.len() })
}
