use multiscaling::descriptives::*;
use multiscaling::process::*;
use multiscaling::rng::RngSpec;
use multiscaling::surrogates::shuffled_increments;
use proptest::prelude::*;

#[test]
fn rough_volatility_diagnostics_order() {
    let stats = |h: f64| {
        let mut k = Vec::new();
        let mut vc = Vec::new();
        for s in 0..30 {
            let p = simulate_rbergomi::<f64>(RBergomiParams::with_hurst(h, 4096), RngSpec::new(s, 0)).unwrap();
            let d = diagnostics(&p.log_price.increments(), 10).unwrap();
            k.push(d.kurtosis);
            vc.push(d.vol_clustering);
        }
        k.sort_by(f64::total_cmp);
        vc.sort_by(f64::total_cmp);
        (k[15], vc[15])
    };
    let (k_rough, vc_rough) = stats(0.01);
    let (k_smooth, vc_smooth) = stats(0.2);
    assert!(k_rough > k_smooth, "{k_rough} {k_smooth}");
    assert!(vc_smooth > vc_rough, "{vc_smooth} {vc_rough}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kurtosis_is_shuffle_invariant(seed in 0u64..10_000) {
        let p = simulate_mrw::<f64>(MrwParams::new(0.25, 1000), RngSpec::new(seed, 0)).unwrap();
        let a = kurtosis(&p.increments()).unwrap();
        let b = kurtosis(&shuffled_increments(&p, RngSpec::new(seed, 1))).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!(a >= 1.0);
    }

    #[test]
    fn acf_is_bounded(xs in prop::collection::vec(-10.0f64..10.0, 30..200)) {
        if let Ok(acf) = acf_abs_returns(&xs, 10) {
            for a in acf {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&a));
            }
        }
    }
}
