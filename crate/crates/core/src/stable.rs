//! Symmetric alpha-stable distribution functions (unit scale, characteristic
//! function `exp(-|t|^alpha)`), evaluated through Zolotarev's integral
//! representation, and the quantile-ratio table used for tail-index lookup.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use quadrature::double_exponential;
use statrs::function::gamma::gamma;

const QUAD_TOL: f64 = 1e-12;

/// `ln(x^{a/(a-1)} V(theta))` for the symmetric case.
fn log_h(alpha: f64, log_x: f64, theta: f64) -> f64 {
    let e = alpha / (alpha - 1.0);
    e * (log_x + theta.cos().ln() - (alpha * theta).sin().ln()) + ((alpha - 1.0) * theta).cos().ln()
        - theta.cos().ln()
}

/// Splits `(0, pi/2)` at the angle where `h(theta) = 1`; `h` is monotone in theta.
fn split_point(alpha: f64, log_x: f64) -> Option<f64> {
    let (mut lo, mut hi) = (1e-12, FRAC_PI_2 - 1e-12);
    let f_lo = log_h(alpha, log_x, lo);
    let f_hi = log_h(alpha, log_x, hi);
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if log_h(alpha, log_x, mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn integrate_split(f: impl Fn(f64) -> f64 + Copy, split: Option<f64>) -> f64 {
    match split {
        Some(s) => {
            double_exponential::integrate(f, 0.0, s, QUAD_TOL).integral
                + double_exponential::integrate(f, s, FRAC_PI_2, QUAD_TOL).integral
        }
        None => double_exponential::integrate(f, 0.0, FRAC_PI_2, QUAD_TOL).integral,
    }
}

fn is_cauchy(alpha: f64) -> bool {
    (alpha - 1.0).abs() < 1e-9
}

/// CDF of the symmetric alpha-stable law.
pub fn stable_cdf(alpha: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    if x < 0.0 {
        return 1.0 - stable_cdf(alpha, -x);
    }
    if is_cauchy(alpha) {
        return 0.5 + x.atan() / PI;
    }
    let lx = x.ln();
    let g = |th: f64| {
        let lh = log_h(alpha, lx, th);
        if lh.is_nan() {
            0.0
        } else {
            (-lh.exp()).exp()
        }
    };
    let integral = integrate_split(g, split_point(alpha, lx));
    if alpha < 1.0 {
        0.5 + integral / PI
    } else {
        1.0 - integral / PI
    }
}

/// Density of the symmetric alpha-stable law.
pub fn stable_pdf(alpha: f64, x: f64) -> f64 {
    let x = x.abs();
    if is_cauchy(alpha) {
        return 1.0 / (PI * (1.0 + x * x));
    }
    if x == 0.0 {
        return gamma(1.0 + 1.0 / alpha) / PI;
    }
    let lx = x.ln();
    let g = |th: f64| {
        let lh = log_h(alpha, lx, th);
        if lh.is_nan() {
            return 0.0;
        }
        let h = lh.exp();
        if h.is_finite() {
            h * (-h).exp()
        } else {
            0.0
        }
    };
    let integral = integrate_split(g, split_point(alpha, lx));
    (alpha / (PI * (alpha - 1.0).abs() * x) * integral).max(0.0)
}

/// Quantile at probability `p` by bracketing and bisection.
pub fn stable_quantile(alpha: f64, p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probability must lie in (0, 1)");
    if p == 0.5 {
        return 0.0;
    }
    if p < 0.5 {
        return -stable_quantile(alpha, 1.0 - p);
    }
    if is_cauchy(alpha) {
        return (PI * (p - 0.5)).tan();
    }
    let mut hi = 1.0;
    while stable_cdf(alpha, hi) < p {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if stable_cdf(alpha, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `(x_{0.95} - x_{0.05}) / (x_{0.75} - x_{0.25})` of the symmetric law.
pub fn quantile_ratio(alpha: f64) -> f64 {
    stable_quantile(alpha, 0.95) / stable_quantile(alpha, 0.75)
}

pub(crate) const TABLE_MIN_ALPHA: f64 = 0.5;
pub(crate) const TABLE_MAX_ALPHA: f64 = 2.0;
const TABLE_STEP: f64 = 0.02;

/// `(alpha, nu(alpha), x_{0.75}(alpha))` on a uniform alpha grid.
pub(crate) fn ratio_table() -> &'static [(f64, f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let steps = ((TABLE_MAX_ALPHA - TABLE_MIN_ALPHA) / TABLE_STEP).round() as usize;
        (0..=steps)
            .map(|i| {
                let a = TABLE_MIN_ALPHA + i as f64 * TABLE_STEP;
                let x75 = stable_quantile(a, 0.75);
                (a, stable_quantile(a, 0.95) / x75, x75)
            })
            .collect()
    })
}

/// Inverts the quantile ratio; clamps to the table range.
pub fn alpha_from_ratio(nu: f64) -> f64 {
    let t = ratio_table();
    // nu decreases in alpha
    if nu >= t[0].1 {
        return t[0].0;
    }
    let last = t[t.len() - 1];
    if nu <= last.1 {
        return last.0;
    }
    let k = t.partition_point(|e| e.1 > nu);
    let (a0, n0, _) = t[k - 1];
    let (a1, n1, _) = t[k];
    a0 + (a1 - a0) * (nu - n0) / (n1 - n0)
}

/// Upper-quartile of the unit-scale law, interpolated from the table.
pub(crate) fn upper_quartile(alpha: f64) -> f64 {
    let t = ratio_table();
    let a = alpha.clamp(TABLE_MIN_ALPHA, TABLE_MAX_ALPHA);
    let k = t.partition_point(|e| e.0 < a).clamp(1, t.len() - 1);
    let (a0, _, x0) = t[k - 1];
    let (a1, _, x1) = t[k];
    x0 + (x1 - x0) * (a - a0) / (a1 - a0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn alpha_two_is_normal_variance_two() {
        let n = Normal::new(0.0, 2f64.sqrt()).unwrap();
        for &x in &[0.1, 0.5, 1.0, 2.0, 4.0] {
            assert!((stable_cdf(2.0, x) - n.cdf(x)).abs() < 1e-10, "x={x}");
        }
        assert!((stable_quantile(2.0, 0.95) - 1.644_853_626_951_472_2 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn near_one_matches_cauchy() {
        for &x in &[0.3, 1.0, 3.0] {
            let c = 0.5 + f64::atan(x) / PI;
            assert!((stable_cdf(0.999, x) - c).abs() < 2e-3);
            assert!((stable_cdf(1.001, x) - c).abs() < 2e-3);
        }
    }

    #[test]
    fn half_alpha_levy_symmetric_closed_form_tail() {
        // Tail: 1 - F(x) ~ c_a x^{-a}, c_a = Gamma(a) sin(pi a / 2) / pi.
        let a = 0.5;
        let x = 1e6;
        let c = gamma(a) * (PI * a / 2.0).sin() / PI;
        let tail = 1.0 - stable_cdf(a, x);
        assert!((tail / (c * x.powf(-a)) - 1.0).abs() < 1e-3, "{tail}");
    }

    #[test]
    fn density_integrates_to_cdf() {
        for &a in &[0.7, 1.5, 1.9] {
            let (lo, hi) = (0.2, 1.7);
            let num = double_exponential::integrate(|x| stable_pdf(a, x), lo, hi, 1e-10).integral;
            let diff = stable_cdf(a, hi) - stable_cdf(a, lo);
            assert!((num - diff).abs() < 1e-7, "alpha {a}: {num} vs {diff}");
        }
        let at_zero = stable_pdf(2.0, 0.0);
        assert!((at_zero - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn ratio_endpoints() {
        let t = ratio_table();
        assert!((t.last().unwrap().1 - 2.438_7).abs() < 1e-3);
        let cauchy = (0.45 * PI).tan();
        let one = t.iter().find(|e| (e.0 - 1.0).abs() < 1e-9).unwrap();
        assert!((one.1 - cauchy).abs() < 1e-9);
    }

    #[test]
    fn ratio_agrees_with_published_lookup() {
        // McCulloch (1986), beta = 0 column.
        for &(nu, alpha) in &[(2.5, 1.916), (3.0, 1.563), (4.0, 1.279), (5.0, 1.128), (6.0, 1.029), (10.0, 0.818)] {
            let est = alpha_from_ratio(nu);
            assert!((est - alpha).abs() < 0.01, "nu {nu}: {est} vs {alpha}");
        }
    }

    #[test]
    fn ratio_is_monotone() {
        let t = ratio_table();
        assert!(t.windows(2).all(|w| w[1].1 < w[0].1));
    }
}
