//! Two-stage surrogate test: presence of multiscaling against matched fBm,
//! then attribution of its source against shuffled increments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ghe::{estimate_ghe, ghe_from_grid, structure_function, GheResult};
use crate::process::PathSeries;
use crate::rng::RngSpec;
use crate::scalar::Scalar;
use crate::surrogates::{shuffle_member, MatchedFbm};
use crate::tuning::{tune, TuningConfig, TuningResult};

/// Smallest surrogate count accepted by the stage tests.
pub const MIN_SURROGATES: usize = 100;
pub const DEFAULT_ALPHA_LEVEL: f64 = 0.05;
pub const DEFAULT_SURROGATES: usize = 1000;
/// Share of requested surrogates that must yield a usable `B`.
pub const DEFAULT_SURROGATE_FLOOR: f64 = 0.9;

/// Stream offsets within one test's [`RngSpec`].
pub const FBM_STREAM: u64 = 1 << 32;
pub const SHUFFLE_STREAM: u64 = 2 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage1 {
    pub p_presence: f64,
    /// Surrogates actually used.
    pub n_surrogates: usize,
    pub requested: usize,
    pub reject: bool,
    /// `(b_original - mean) / sd` over the surrogates; does not enter `p`.
    pub standardized_t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Temporal structure makes `B` more negative than its shuffled centre.
    Enhancing,
    Reducing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2 {
    pub p_source: f64,
    pub n_surrogates: usize,
    pub requested: usize,
    /// Median of the shuffled `B` values.
    pub median: f64,
    pub d_orig: f64,
    pub reject: bool,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NotMultiscaling,
    Distributional,
    TemporalEnhancing,
    TemporalReducing,
}

impl Classification {
    pub fn is_temporal(self) -> bool {
        matches!(self, Classification::TemporalEnhancing | Classification::TemporalReducing)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::NotMultiscaling => "not_multiscaling",
            Classification::Distributional => "distributional",
            Classification::TemporalEnhancing => "temporal_enhancing",
            Classification::TemporalReducing => "temporal_reducing",
        }
    }
}

fn check_alpha_level(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha_level", format!("must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InsufficientData(format!("no {what}")));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok(())
}

fn check_min(count: usize, name: &'static str) -> Result<()> {
    if count < MIN_SURROGATES {
        return Err(invalid(name, format!("need >= {MIN_SURROGATES} surrogates, got {count}")));
    }
    Ok(())
}

/// `(1/I) #{b_fbm <= b_original}` without the minimum-count check.
pub fn presence_p_value(b_original: f64, b_fbm: &[f64]) -> f64 {
    b_fbm.iter().filter(|&&b| b <= b_original).count() as f64 / b_fbm.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

fn standardized(b_original: f64, xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (sd > 0.0).then(|| (b_original - mean) / sd)
}

fn stage1_unchecked(b_original: f64, b_fbm: &[f64], alpha_level: f64, requested: usize) -> Result<Stage1> {
    check_alpha_level(alpha_level)?;
    check_finite(b_fbm, "fBm surrogate B values")?;
    let p = presence_p_value(b_original, b_fbm);
    Ok(Stage1 {
        p_presence: p,
        n_surrogates: b_fbm.len(),
        requested,
        reject: p < alpha_level,
        standardized_t: standardized(b_original, b_fbm),
    })
}

/// One-sided rank test of `b_original` against matched-fBm values.
pub fn stage1_presence(b_original: f64, b_fbm: &[f64], alpha_level: f64) -> Result<Stage1> {
    check_min(b_fbm.len(), "b_fbm")?;
    stage1_unchecked(b_original, b_fbm, alpha_level, b_fbm.len())
}

/// Median-centred two-sided distance test, without the minimum-count check.
pub fn source_statistics(b_original: f64, b_shuf: &[f64], alpha_level: f64) -> Result<Stage2> {
    check_alpha_level(alpha_level)?;
    check_finite(b_shuf, "shuffled surrogate B values")?;
    let centre = median(b_shuf);
    let d_orig = (b_original - centre).abs();
    let hits = b_shuf.iter().filter(|&&b| (b - centre).abs() >= d_orig).count();
    let p = hits as f64 / b_shuf.len() as f64;
    Ok(Stage2 {
        p_source: p,
        n_surrogates: b_shuf.len(),
        requested: b_shuf.len(),
        median: centre,
        d_orig,
        reject: p < alpha_level,
        direction: if b_original < centre { Direction::Enhancing } else { Direction::Reducing },
    })
}

pub fn stage2_source(b_original: f64, b_shuf: &[f64], alpha_level: f64) -> Result<Stage2> {
    check_min(b_shuf.len(), "b_shuf")?;
    source_statistics(b_original, b_shuf, alpha_level)
}

pub fn classify(stage1: &Stage1, stage2: Option<&Stage2>) -> Classification {
    match (stage1.reject, stage2) {
        (false, _) | (true, None) => Classification::NotMultiscaling,
        (true, Some(s)) if !s.reject => Classification::Distributional,
        (true, Some(s)) => match s.direction {
            Direction::Enhancing => Classification::TemporalEnhancing,
            Direction::Reducing => Classification::TemporalReducing,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestConfig {
    pub alpha_level: f64,
    /// Matched-fBm surrogates `I`.
    pub n_fbm: usize,
    /// Shuffled surrogates `J`.
    pub n_shuffle: usize,
    pub surrogate_floor: f64,
    pub tuning: TuningConfig,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            alpha_level: DEFAULT_ALPHA_LEVEL,
            n_fbm: DEFAULT_SURROGATES,
            n_shuffle: DEFAULT_SURROGATES,
            surrogate_floor: DEFAULT_SURROGATE_FLOOR,
            tuning: TuningConfig::default(),
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha_level(self.alpha_level)?;
        check_min(self.n_fbm, "n_fbm")?;
        check_min(self.n_shuffle, "n_shuffle")?;
        if !(self.surrogate_floor > 0.0 && self.surrogate_floor <= 1.0) {
            return Err(invalid("surrogate_floor", format!("must lie in (0, 1], got {}", self.surrogate_floor)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub b_original: f64,
    /// `H(1)` of the original (before clamping for the fBm generator).
    pub h1: f64,
    #[serde(default)]
    pub hurst_clamped: bool,
    pub stage1: Stage1,
    pub stage2: Option<Stage2>,
    pub classification: Classification,
    pub alpha_level: f64,
    pub tuning: TuningResult,
}

/// `B` of a path on fixed grids.
pub fn b_statistic<T: Scalar>(path: &PathSeries<T>, tuning: &TuningResult) -> Result<f64> {
    let qs: Vec<T> = tuning.qs();
    let ghe = ghe_from_grid(&structure_function(path, &tuning.taus(), &qs)?)?;
    ghe.b().map(|b| b.to_f64_lossy()).filter(|b| b.is_finite()).ok_or_else(|| {
        Error::DegenerateInput("multiscaling proxy undefined".into())
    })
}

/// GHE of the original on its tuned grids, plus `H(1)` (fitted separately if
/// `q = 1` is not a grid point).
pub fn original_fit<T: Scalar>(path: &PathSeries<T>, tuning: &TuningResult) -> Result<(GheResult<T>, f64)> {
    let taus = tuning.taus();
    let ghe = estimate_ghe(path, &taus, &tuning.qs::<T>())?;
    let h1 = match ghe.h_at(T::one()) {
        Some(h) => h,
        None => estimate_ghe(path, &taus, &[T::one()])?.per_q[0].hq,
    };
    Ok((ghe, h1.to_f64_lossy()))
}

fn collect_kept(results: Vec<Result<f64>>, requested: usize, floor: f64) -> Result<Vec<f64>> {
    let kept: Vec<f64> = results.into_iter().filter_map(|r| r.ok()).collect();
    let min_kept = (floor * requested as f64 - 1e-9).ceil() as usize;
    if kept.len() < min_kept {
        return Err(Error::SurrogateFloor { kept: kept.len(), requested, floor: min_kept });
    }
    Ok(kept)
}

/// Tunes on `path`, then runs both stages.
pub fn run_two_stage<T: Scalar>(path: &PathSeries<T>, config: &TestConfig, rng: RngSpec) -> Result<TestVerdict> {
    config.validate()?;
    let tuning = tune(path, &config.tuning)?;
    run_two_stage_tuned(path, tuning, config, rng)
}

/// Both stages on grids already chosen for `path`; surrogates reuse them.
pub fn run_two_stage_tuned<T: Scalar>(
    path: &PathSeries<T>,
    tuning: TuningResult,
    config: &TestConfig,
    rng: RngSpec,
) -> Result<TestVerdict> {
    config.validate()?;
    let (ghe, h1) = original_fit(path, &tuning)?;
    let b_original = ghe
        .b()
        .map(|b| b.to_f64_lossy())
        .ok_or_else(|| Error::DegenerateInput("fewer than two moment orders".into()))?;

    let fbm = MatchedFbm::new(path, h1)?;
    let fbm_base = rng.offset(FBM_STREAM);
    let b_fbm: Vec<Result<f64>> = (0..config.n_fbm as u64)
        .into_par_iter()
        .map(|i| b_statistic(&fbm.member(fbm_base, i), &tuning))
        .collect();
    let b_fbm = collect_kept(b_fbm, config.n_fbm, config.surrogate_floor)?;
    let stage1 = stage1_unchecked(b_original, &b_fbm, config.alpha_level, config.n_fbm)?;

    let stage2 = if stage1.reject {
        let shuf_base = rng.offset(SHUFFLE_STREAM);
        let b_shuf: Vec<Result<f64>> = (0..config.n_shuffle as u64)
            .into_par_iter()
            .map(|i| b_statistic(&shuffle_member(path, shuf_base, i), &tuning))
            .collect();
        let b_shuf = collect_kept(b_shuf, config.n_shuffle, config.surrogate_floor)?;
        let mut s = source_statistics(b_original, &b_shuf, config.alpha_level)?;
        s.requested = config.n_shuffle;
        Some(s)
    } else {
        None
    };

    Ok(TestVerdict {
        b_original,
        h1,
        hurst_clamped: fbm.source().hurst_clamped,
        classification: classify(&stage1, stage2.as_ref()),
        stage1,
        stage2,
        alpha_level: config.alpha_level,
        tuning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage1_all_above() {
        let b: Vec<f64> = (0..1000).map(|i| -0.019 + 1e-5 * i as f64).collect();
        let s = stage1_presence(-0.08, &b, 0.05).unwrap();
        assert_eq!(s.p_presence, 0.0);
        assert!(s.reject);
    }

    #[test]
    fn stage1_at_maximum() {
        let b: Vec<f64> = (0..200).map(|i| i as f64 * 0.001).collect();
        let s = stage1_presence(0.199, &b, 0.05).unwrap();
        assert_eq!(s.p_presence, 1.0);
        assert!(!s.reject);
    }

    #[test]
    fn stage1_at_median() {
        let b: Vec<f64> = (0..201).map(|i| i as f64).collect();
        let p = stage1_presence(100.0, &b, 0.05).unwrap().p_presence;
        assert!((p - 0.5).abs() < 0.01);
    }

    #[test]
    fn too_few_surrogates() {
        assert!(stage1_presence(0.0, &[0.1; 99], 0.05).is_err());
        assert!(stage2_source(0.0, &[0.1; 99], 0.05).is_err());
    }

    #[test]
    fn stage2_hand_example() {
        let b = [-0.01, -0.02, -0.03, -0.04, -0.05];
        let s = source_statistics(-0.055, &b, 0.05).unwrap();
        assert!((s.median + 0.03).abs() < 1e-15);
        assert!((s.d_orig - 0.025).abs() < 1e-12);
        assert_eq!(s.p_source, 0.0);
        assert!(s.reject);
        assert_eq!(s.direction, Direction::Enhancing);
    }

    #[test]
    fn stage2_centre() {
        let b: Vec<f64> = (0..101).map(|i| i as f64).collect();
        let s = stage2_source(50.0, &b, 0.05).unwrap();
        assert_eq!(s.d_orig, 0.0);
        assert_eq!(s.p_source, 1.0);
        assert!(!s.reject);
    }

    #[test]
    fn classification_partition() {
        let s1 = |reject| Stage1 { p_presence: 0.0, n_surrogates: 100, requested: 100, reject, standardized_t: None };
        let s2 = |reject, direction| Stage2 {
            p_source: 0.0,
            n_surrogates: 100,
            requested: 100,
            median: 0.0,
            d_orig: 0.0,
            reject,
            direction,
        };
        assert_eq!(classify(&s1(false), None), Classification::NotMultiscaling);
        assert_eq!(classify(&s1(true), Some(&s2(false, Direction::Reducing))), Classification::Distributional);
        assert_eq!(classify(&s1(true), Some(&s2(true, Direction::Enhancing))), Classification::TemporalEnhancing);
        assert_eq!(classify(&s1(true), Some(&s2(true, Direction::Reducing))), Classification::TemporalReducing);
    }

    #[test]
    fn floor_enforced() {
        let mut r: Vec<Result<f64>> = (0..100).map(|i| Ok(i as f64)).collect();
        for x in r.iter_mut().take(10) {
            *x = Err(Error::Collinear);
        }
        assert_eq!(collect_kept(r.clone(), 100, 0.9).unwrap().len(), 90);
        r[10] = Err(Error::Collinear);
        assert!(matches!(collect_kept(r, 100, 0.9), Err(Error::SurrogateFloor { kept: 89, .. })));
    }
}
