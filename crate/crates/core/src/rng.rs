//! Seeded random streams and the base noise generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Identifies one reproducible random stream.
///
/// Equal `(seed, stream_id)` pairs replay the same sequence; distinct stream
/// ids on the same seed select non-overlapping ChaCha streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Same seed, stream shifted by `offset`.
    pub fn offset(self, offset: u64) -> Self {
        Self { seed: self.seed, stream_id: self.stream_id.wrapping_add(offset) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for simulation `sim_index` of grid point `grid_index`, independent of
/// scheduling order.
pub fn derive_seed(base_seed: u64, grid_index: u64, sim_index: u64) -> u64 {
    mix64(mix64(mix64(base_seed) ^ grid_index) ^ sim_index.rotate_left(32))
}

pub(crate) fn fill_normals<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for x in out.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
}

/// `n` i.i.d. standard normal variates.
pub fn gaussian_noise<T: Scalar>(rng: RngSpec, n: usize) -> Vec<T> {
    let mut r = rng.rng();
    (0..n).map(|_| T::lit(r.sample::<f64, _>(StandardNormal))).collect()
}

/// One symmetric alpha-stable draw with unit scale (Chambers-Mallows-Stuck).
///
/// Scale convention: characteristic function `exp(-|t|^alpha)`, so `alpha = 2`
/// gives a Gaussian with variance 2.
pub(crate) fn stable_draw<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    loop {
        let u: f64 = std::f64::consts::PI * (rng.sample::<f64, _>(Open01) - 0.5);
        let w: f64 = rng.sample(Exp1);
        let x = if (alpha - 1.0).abs() < 1e-12 {
            u.tan()
        } else {
            let au = alpha * u;
            au.sin() / u.cos().powf(1.0 / alpha) * ((u - au).cos() / w).powf((1.0 - alpha) / alpha)
        };
        if x.is_finite() {
            return x;
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(invalid("alpha", format!("stability index must lie in (0, 2], got {alpha}")));
    }
    Ok(())
}

/// `n` i.i.d. symmetric alpha-stable variates with unit scale.
pub fn stable_noise<T: Scalar>(rng: RngSpec, alpha: f64, n: usize) -> Result<Vec<T>> {
    check_alpha(alpha)?;
    let mut r = rng.rng();
    Ok((0..n).map(|_| T::lit(stable_draw(&mut r, alpha))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        (m, x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n)
    }

    #[test]
    fn gaussian_moments() {
        let x: Vec<f64> = gaussian_noise(RngSpec::new(7, 0), 1_000_000);
        let (m, v) = mean_var(&x);
        assert!(m.abs() < 4.0 / 1000.0, "mean {m}");
        assert!((v - 1.0).abs() < 0.01, "var {v}");
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a: Vec<f64> = gaussian_noise(RngSpec::new(11, 3), 1000);
        let b: Vec<f64> = gaussian_noise(RngSpec::new(11, 3), 1000);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn streams_are_uncorrelated() {
        let n = 1_000_000;
        let a: Vec<f64> = gaussian_noise(RngSpec::new(7, 0), n);
        let b: Vec<f64> = gaussian_noise(RngSpec::new(7, 1), n);
        let (ma, va) = mean_var(&a);
        let (mb, vb) = mean_var(&b);
        let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n as f64;
        let r = cov / (va * vb).sqrt();
        assert!(r.abs() < 0.01, "cross-correlation {r}");
    }

    #[test]
    fn stable_alpha_two_is_gaussian_with_variance_two() {
        let x: Vec<f64> = stable_noise(RngSpec::new(1, 0), 2.0, 1_000_000).unwrap();
        let (_, v) = mean_var(&x);
        assert!((v - 2.0).abs() < 0.04, "var {v}");
    }

    #[test]
    fn stable_alpha_one_is_cauchy() {
        let mut x: Vec<f64> = stable_noise(RngSpec::new(2, 0), 1.0, 1_000_000).unwrap();
        x.sort_by(f64::total_cmp);
        let n = x.len();
        let iqr = x[3 * n / 4] - x[n / 4];
        assert!((iqr - 2.0).abs() < 0.04, "iqr {iqr}");
    }

    #[test]
    fn stable_rejects_bad_alpha() {
        assert!(stable_noise::<f64>(RngSpec::new(0, 0), 0.0, 10).is_err());
        assert!(stable_noise::<f64>(RngSpec::new(0, 0), 2.1, 10).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, 0, 0);
        assert_ne!(a, derive_seed(1, 0, 1));
        assert_ne!(a, derive_seed(1, 1, 0));
        assert_ne!(a, derive_seed(2, 0, 0));
        assert_eq!(a, derive_seed(1, 0, 0));
    }
}
