use multiscaling::hypothesis::*;
use multiscaling::process::*;
use multiscaling::rng::{gaussian_noise, RngSpec};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn stage1_p_value_is_uniform_under_exchangeability() {
    let reps = 2000u64;
    let mut bins = [0usize; 10];
    for r in 0..reps {
        let x: Vec<f64> = gaussian_noise(RngSpec::new(r, 0), 101);
        let p = stage1_presence(x[0], &x[1..], 0.05).unwrap().p_presence;
        bins[((p * 10.0) as usize).min(9)] += 1;
    }
    let e = reps as f64 / 10.0;
    let chi2: f64 = bins.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    assert!(chi2 < ChiSquared::new(9.0).unwrap().inverse_cdf(0.99), "{bins:?}");
}

#[test]
fn verdict_is_reproducible() {
    let path = simulate_rbergomi::<f64>(RBergomiParams::with_hurst(0.05, 2048), RngSpec::new(1, 0)).unwrap().log_price;
    let cfg = TestConfig { n_fbm: 100, n_shuffle: 100, ..Default::default() };
    let a = run_two_stage(&path, &cfg, RngSpec::new(1, 0)).unwrap();
    let b = run_two_stage(&path, &cfg, RngSpec::new(1, 0)).unwrap();
    assert_eq!(a, b);
    assert!(a.stage1.reject);
    let s2 = a.stage2.unwrap();
    assert_eq!(a.classification.is_temporal(), s2.reject);
    if s2.reject {
        assert_eq!(a.classification == Classification::TemporalEnhancing, a.b_original < s2.median);
    }
    let json = serde_json::to_string(&a).unwrap();
    assert_eq!(serde_json::from_str::<TestVerdict>(&json).unwrap(), a);
}

#[test]
fn uniscaling_input_skips_stage_two() {
    let path = simulate_fbm::<f64>(FbmParams::new(0.5, 4096), RngSpec::new(12, 0)).unwrap();
    let cfg = TestConfig { n_fbm: 100, n_shuffle: 100, ..Default::default() };
    let v = run_two_stage(&path, &cfg, RngSpec::new(12, 0)).unwrap();
    assert_eq!(v.stage2.is_some(), v.stage1.reject);
    if !v.stage1.reject {
        assert_eq!(v.classification, Classification::NotMultiscaling);
    }
}

#[test]
fn config_rejects_small_batches() {
    let path = simulate_fbm::<f64>(FbmParams::new(0.5, 2000), RngSpec::new(1, 0)).unwrap();
    let cfg = TestConfig { n_fbm: 50, ..Default::default() };
    assert!(run_two_stage(&path, &cfg, RngSpec::new(1, 0)).is_err());
}

proptest! {
    #[test]
    fn stage2_p_monotone_in_distance(
        b in prop::collection::vec(-0.1f64..0.1, 100..200),
        d1 in 0.0f64..0.2,
        extra in 0.0f64..0.1,
    ) {
        let centre = source_statistics(0.0, &b, 0.05).unwrap().median;
        let near = source_statistics(centre + d1, &b, 0.05).unwrap();
        let far = source_statistics(centre - d1 - extra, &b, 0.05).unwrap();
        prop_assert!(far.p_source <= near.p_source);
        prop_assert!((0.0..=1.0).contains(&near.p_source));
        let at_centre = source_statistics(centre, &b, 0.05).unwrap();
        prop_assert_eq!(at_centre.p_source, 1.0);
        let max_d = b.iter().map(|x| (x - centre).abs()).fold(0.0, f64::max);
        let beyond = source_statistics(centre + max_d + 1e-6, &b, 0.05).unwrap();
        prop_assert_eq!(beyond.p_source, 0.0);
    }

    #[test]
    fn classification_matches_stage_flags(b0 in -0.2f64..0.2, b in prop::collection::vec(-0.1f64..0.1, 100..150)) {
        let s1 = stage1_presence(b0, &b, 0.05).unwrap();
        let s2 = stage2_source(b0, &b, 0.05).unwrap();
        let c = classify(&s1, Some(&s2));
        prop_assert_eq!(c == Classification::NotMultiscaling, !s1.reject);
        if c == Classification::TemporalEnhancing { prop_assert!(b0 < s2.median); }
        if c == Classification::TemporalReducing { prop_assert!(b0 >= s2.median); }
    }
}
