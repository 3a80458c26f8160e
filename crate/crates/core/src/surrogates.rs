//! Surrogate families for the two test stages: matched uniscaling fBm and
//! shuffled-increment reconstructions.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ghe::GheResult;
use crate::process::{FbmGenerator, FbmParams, PathMeta, PathSeries, ProcessParams};
use crate::rng::RngSpec;
use crate::scalar::Scalar;

/// Bounds applied to `H(1)` before it is used as the fBm Hurst exponent.
pub const HURST_CLAMP: (f64, f64) = (0.01, 0.99);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateKind {
    MatchedFbm,
    Shuffled,
}

/// What a batch was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub original: PathMeta,
    pub len: usize,
    /// Hurst exponent given to the fBm generator (after clamping).
    pub hurst: Option<f64>,
    #[serde(default)]
    pub hurst_clamped: bool,
    /// Lag-1 increment standard deviation matched by the fBm scale.
    pub increment_sd: Option<f64>,
    /// Moment orders and largest lag of the GHE fit that supplied `H(1)`.
    pub qs: Vec<f64>,
    pub tau_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SurrogateBatch<T> {
    pub kind: SurrogateKind,
    pub series: Vec<PathSeries<T>>,
    pub source_meta: SourceMeta,
    /// Base stream; member `i` draws from `rng.offset(i)`.
    pub rng: RngSpec,
}

impl<T: Scalar> SurrogateBatch<T> {
    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(invalid("count", "surrogate count must be >= 1"));
    }
    Ok(())
}

/// Population standard deviation of the lag-1 increments.
fn increment_sd<T: Scalar>(path: &PathSeries<T>) -> f64 {
    let inc: Vec<f64> = path.increments().iter().map(|d| d.to_f64_lossy()).collect();
    let n = inc.len() as f64;
    let mean = inc.iter().sum::<f64>() / n;
    (inc.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n).sqrt()
}

/// Shared generator for fBm surrogates of one original series.
#[derive(Debug, Clone)]
pub struct MatchedFbm<T: Scalar> {
    generator: FbmGenerator<T>,
    source: SourceMeta,
}

impl<T: Scalar> MatchedFbm<T> {
    /// fBm with Hurst `h1` and lag-1 increment SD equal to the original's.
    pub fn new(original: &PathSeries<T>, h1: f64) -> Result<Self> {
        if !h1.is_finite() {
            return Err(Error::NonFinite("H(1) of the original series".into()));
        }
        let hurst = h1.clamp(HURST_CLAMP.0, HURST_CLAMP.1);
        let sd = increment_sd(original);
        if !(sd > 0.0) {
            return Err(Error::DegenerateInput("original series has constant increments".into()));
        }
        let params = FbmParams { hurst, n: original.len(), scale: sd };
        Ok(Self {
            generator: FbmGenerator::new(params)?,
            source: SourceMeta {
                original: original.meta.clone(),
                len: original.len(),
                hurst: Some(hurst),
                hurst_clamped: hurst != h1,
                increment_sd: Some(sd),
                qs: Vec::new(),
                tau_max: None,
            },
        })
    }

    pub fn source(&self) -> &SourceMeta {
        &self.source
    }

    pub fn member(&self, base: RngSpec, index: u64) -> PathSeries<T> {
        self.generator.sample(base.offset(index))
    }
}

/// `count` fBm paths whose Hurst exponent is the original's `H(1)`.
pub fn matched_fbm<T: Scalar>(
    original: &PathSeries<T>,
    ghe: &GheResult<T>,
    count: usize,
    rng: RngSpec,
) -> Result<SurrogateBatch<T>> {
    check_count(count)?;
    let h1 = ghe.h_at(T::one()).ok_or(Error::MissingUnitMoment)?;
    let mut gen = MatchedFbm::new(original, h1.to_f64_lossy())?;
    gen.source.qs = ghe.qs().iter().map(|q| q.to_f64_lossy()).collect();
    gen.source.tau_max = ghe.taus.last().copied();
    let series = (0..count as u64).map(|i| gen.member(rng, i)).collect();
    Ok(SurrogateBatch { kind: SurrogateKind::MatchedFbm, series, source_meta: gen.source, rng })
}

/// Increments of `original` in a uniformly random order.
pub fn shuffled_increments<T: Scalar>(original: &PathSeries<T>, rng: RngSpec) -> Vec<T> {
    let mut inc = original.increments();
    inc.shuffle(&mut rng.rng());
    inc
}

/// `X_0 + cumulative sum` with Neumaier compensation; the final level is
/// pinned to `end` so that the telescoping identity holds exactly.
fn rebuild<T: Scalar>(start: T, increments: &[T], end: T) -> Vec<T> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(start);
    let (mut sum, mut comp) = (start.to_f64_lossy(), 0.0f64);
    for &d in increments {
        let d = d.to_f64_lossy();
        let t = sum + d;
        comp += if sum.abs() >= d.abs() { (sum - t) + d } else { (d - t) + sum };
        sum = t;
        out.push(T::lit(sum + comp));
    }
    *out.last_mut().unwrap() = end;
    out
}

/// Path rebuilt from one permutation of the original's increments.
pub fn shuffle_member<T: Scalar>(original: &PathSeries<T>, base: RngSpec, index: u64) -> PathSeries<T> {
    let rng = base.offset(index);
    let inc = shuffled_increments(original, rng);
    let v = original.values();
    let values = rebuild(v[0], &inc, v[v.len() - 1]);
    let meta = PathMeta { process: ProcessParams::Shuffled, rng: Some(rng), embedding_clipped: false };
    PathSeries::new(values, meta).expect("finite shuffled path")
}

/// `count` reconstructions from independently permuted increments.
pub fn shuffle_surrogates<T: Scalar>(
    original: &PathSeries<T>,
    count: usize,
    rng: RngSpec,
) -> Result<SurrogateBatch<T>> {
    check_count(count)?;
    if original.len() < 3 {
        return Err(invalid("original", format!("shuffling needs length >= 3, got {}", original.len())));
    }
    let series = (0..count as u64).map(|i| shuffle_member(original, rng, i)).collect();
    let source_meta = SourceMeta {
        original: original.meta.clone(),
        len: original.len(),
        hurst: None,
        hurst_clamped: false,
        increment_sd: None,
        qs: Vec::new(),
        tau_max: None,
    };
    Ok(SurrogateBatch { kind: SurrogateKind::Shuffled, series, source_meta, rng })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghe::{estimate_ghe, q_ladder, unit_lag_range};
    use crate::process::simulate_fbm;

    fn fbm(h: f64, n: usize, seed: u64) -> PathSeries<f64> {
        simulate_fbm(FbmParams::new(h, n), RngSpec::new(seed, 0)).unwrap()
    }

    #[test]
    fn zero_count_is_error() {
        let p = fbm(0.4, 1000, 1);
        let g = estimate_ghe(&p, &unit_lag_range(20), &q_ladder(0.5, 1.0)).unwrap();
        assert!(matched_fbm(&p, &g, 0, RngSpec::new(2, 0)).is_err());
        assert!(shuffle_surrogates(&p, 0, RngSpec::new(2, 0)).is_err());
    }

    #[test]
    fn missing_unit_moment() {
        let p = fbm(0.4, 1000, 1);
        let g = estimate_ghe(&p, &unit_lag_range(20), &[0.5, 1.5]).unwrap();
        assert_eq!(matched_fbm(&p, &g, 3, RngSpec::new(2, 0)).unwrap_err(), Error::MissingUnitMoment);
    }

    #[test]
    fn matched_scale_and_length() {
        let p = fbm(0.4, 2000, 3);
        let g = estimate_ghe(&p, &unit_lag_range(20), &q_ladder(0.1, 1.5)).unwrap();
        let b = matched_fbm(&p, &g, 4, RngSpec::new(9, 0)).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.series.iter().all(|s| s.len() == 2000));
        let h = b.source_meta.hurst.unwrap();
        assert!((h - g.h_at(1.0).unwrap()).abs() < 1e-12);
        assert!((b.source_meta.increment_sd.unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn hurst_is_clamped() {
        let p = fbm(0.4, 500, 3);
        let m = MatchedFbm::new(&p, 1.3).unwrap();
        assert_eq!(m.source().hurst, Some(0.99));
        assert!(m.source().hurst_clamped);
    }

    #[test]
    fn shuffle_endpoints_exact() {
        let p = PathSeries::observed(vec![0.1, 0.7, 0.2, 1.9, -0.3, 0.33]).unwrap();
        let b = shuffle_surrogates(&p, 50, RngSpec::new(4, 0)).unwrap();
        for s in &b.series {
            assert_eq!(s.values()[0], 0.1);
            assert_eq!(*s.values().last().unwrap(), 0.33);
        }
    }

    #[test]
    fn shuffle_needs_three_points() {
        let p = PathSeries::observed(vec![0.0, 1.0]).unwrap();
        assert!(shuffle_surrogates(&p, 1, RngSpec::new(1, 0)).is_err());
    }

    #[test]
    fn members_are_order_independent() {
        let p = fbm(0.3, 300, 5);
        let b = shuffle_surrogates(&p, 5, RngSpec::new(7, 10)).unwrap();
        assert_eq!(b.series[3], shuffle_member(&p, RngSpec::new(7, 10), 3));
    }
}
