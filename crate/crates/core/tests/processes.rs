use multiscaling::process::*;
use multiscaling::rng::{stable_noise, RngSpec};
use statrs::distribution::{ContinuousCDF, Normal};

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the one-sample KS statistic.
fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

#[test]
fn fbm_autocovariance_matches_theory() {
    let (h, n, paths) = (0.3, 1000, 200);
    let gen = FbmGenerator::<f64>::new(FbmParams::new(h, n)).unwrap();
    for k in 0..=5usize {
        let per_path: Vec<f64> = (0..paths)
            .map(|i| {
                let inc = gen.sample_increments(RngSpec::new(77, i as u64));
                let m = inc.len() - k;
                inc[..m].iter().zip(&inc[k..]).map(|(a, b)| a * b).sum::<f64>() / m as f64
            })
            .collect();
        let mean = per_path.iter().sum::<f64>() / paths as f64;
        let sd = (per_path.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (paths - 1) as f64).sqrt();
        let se = sd / (paths as f64).sqrt();
        let gamma = fgn_autocovariance(h, 1.0, k);
        assert!((mean - gamma).abs() < 3.0 * se, "k={k}: {mean} vs {gamma} (se {se})");
    }
}

#[test]
fn rbergomi_variance_mean_is_forward_variance() {
    let p = RBergomiParams::with_hurst(0.1, 400);
    let sim = RBergomiSimulator::new(p).unwrap();
    let paths = 400;
    let vs: Vec<Vec<f64>> = (0..paths).map(|i| sim.sample::<f64>(RngSpec::new(5, i)).unwrap().variance).collect();
    for &t in &[1usize, 50, 200, 399] {
        let col: Vec<f64> = vs.iter().map(|v| v[t]).collect();
        let mean = col.iter().sum::<f64>() / paths as f64;
        let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (paths - 1) as f64).sqrt();
        assert!((mean - p.xi0).abs() < 4.0 * sd / (paths as f64).sqrt(), "t={t}: {mean}");
    }
}

#[test]
fn hybrid_scheme_agrees_with_exact_cholesky() {
    // Compare the law of the log-variance at the last step and of the
    // squared returns under both schemes.
    let p = RBergomiParams { dt: 1.0 / 256.0, ..RBergomiParams::with_hurst(0.1, 256) };
    let sim = RBergomiSimulator::new(p).unwrap();
    let exact_sim = RBergomiExact::new(p).unwrap();
    let paths = 300u64;
    let stats = |exact: bool| {
        let mut logv = Vec::new();
        let mut rv = Vec::new();
        for i in 0..paths {
            let rng = RngSpec::new(if exact { 101 } else { 202 }, i);
            let path: RBergomiPath<f64> = if exact { exact_sim.sample(rng).unwrap() } else { sim.sample(rng).unwrap() };
            logv.push(path.variance.last().unwrap().ln());
            rv.push(path.log_price.increments().iter().map(|r| r * r).sum::<f64>());
        }
        (logv, rv)
    };
    let (lv_h, rv_h) = stats(false);
    let (lv_e, rv_e) = stats(true);
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let var = |x: &[f64]| {
        let m = mean(x);
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
    };
    let se_diff = |a: &[f64], b: &[f64]| (var(a) / a.len() as f64 + var(b) / b.len() as f64).sqrt();
    assert!((mean(&lv_h) - mean(&lv_e)).abs() < 4.0 * se_diff(&lv_h, &lv_e));
    assert!((var(&lv_h) / var(&lv_e) - 1.0).abs() < 0.3);
    // Exact log-variance at T has variance eta^2 T^{2H}.
    let theory = p.eta * p.eta;
    assert!((var(&lv_e) / theory - 1.0).abs() < 0.25, "{}", var(&lv_e));
    assert!((mean(&rv_h) - mean(&rv_e)).abs() < 4.0 * se_diff(&rv_h, &rv_e));
}

#[test]
fn mrw_without_intermittency_is_gaussian() {
    let p = simulate_mrw::<f64>(MrwParams::new(0.0, 20_001), RngSpec::new(3, 0)).unwrap();
    let inc = p.increments();
    let n = Normal::new(0.0, 1.0).unwrap();
    assert!(ks_distance(&inc, |x| n.cdf(x)) < ks_critical(inc.len()));
}

#[test]
fn flsm_gaussian_case_reduces_to_brownian() {
    let p = simulate_flsm::<f64>(FlsmParams::new(2.0, 0.5, 20_001), RngSpec::new(4, 0)).unwrap();
    let inc = p.increments();
    let n = Normal::new(0.0, 2f64.sqrt()).unwrap();
    assert!(ks_distance(&inc, |x| n.cdf(x)) < ks_critical(inc.len()));
}

#[test]
fn flsm_without_memory_has_stable_increments() {
    let alpha = 1.5;
    let p = simulate_flsm::<f64>(FlsmParams::new(alpha, 1.0 / alpha, 20_001), RngSpec::new(6, 0)).unwrap();
    let inc = p.increments();
    let d = ks_distance(&inc, |x| multiscaling::stable::stable_cdf(alpha, x));
    assert!(d < ks_critical(inc.len()), "{d}");
    let direct: Vec<f64> = stable_noise(RngSpec::new(6, 1), alpha, 20_000).unwrap();
    assert!(ks_distance(&direct, |x| multiscaling::stable::stable_cdf(alpha, x)) < ks_critical(20_000));
}

#[test]
fn simulators_are_deterministic() {
    let rng = RngSpec::new(9, 3);
    let a = simulate_rbergomi::<f64>(RBergomiParams::with_hurst(0.05, 1000), rng).unwrap();
    let b = simulate_rbergomi::<f64>(RBergomiParams::with_hurst(0.05, 1000), rng).unwrap();
    assert_eq!(a.log_price, b.log_price);
    let a = simulate_mrw::<f32>(MrwParams::new(0.2, 1000), rng).unwrap();
    let b = simulate_mrw::<f32>(MrwParams::new(0.2, 1000), rng).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_precision_paths_track_double() {
    let rng = RngSpec::new(10, 0);
    let a = simulate_fbm::<f32>(FbmParams::new(0.4, 512), rng).unwrap();
    let b = simulate_fbm::<f64>(FbmParams::new(0.4, 512), rng).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((*x as f64 - y).abs() < 1e-3 * (1.0 + y.abs()));
    }
}
