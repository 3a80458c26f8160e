//! Exact stationary Gaussian sampling by circulant embedding.

use std::sync::Arc;

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::rng::fill_normals;
use crate::scalar::Scalar;

/// Eigenvalues more negative than this fraction of the largest one are clipped
/// silently (round-off).
const ROUNDOFF_TOL: f64 = 1e-10;
/// Beyond `ROUNDOFF_TOL` but within this fraction: clip and flag.
const CLIP_TOL: f64 = 1e-6;

/// Pre-factored circulant embedding of a stationary covariance `c(0..n)`.
#[derive(Clone)]
pub struct CirculantSampler<T: Scalar> {
    n: usize,
    m: usize,
    scale: Vec<T>,
    fft: Arc<dyn Fft<T>>,
    clipped: bool,
}

impl<T: Scalar> std::fmt::Debug for CirculantSampler<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("clipped", &self.clipped)
            .finish()
    }
}

impl<T: Scalar> CirculantSampler<T> {
    /// `cov(k)` is the autocovariance at lag `k`; it is evaluated for
    /// `k = 0..=m/2` where `m` is the embedding size.
    pub fn new(n: usize, cov: impl Fn(usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InsufficientData("circulant embedding needs n >= 1".into()));
        }
        let m = (2 * n.saturating_sub(1)).max(2).next_power_of_two();
        let half = m / 2;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let k = if j <= half { j } else { m - j };
                Complex::new(cov(k), 0.0)
            })
            .collect();
        FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut row);

        let max = row.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || !min.is_finite() {
            return Err(Error::EmbeddingFailed { min_eigenvalue: min, max_eigenvalue: max });
        }
        let clipped = if min >= -ROUNDOFF_TOL * max {
            false
        } else if -min < CLIP_TOL * max {
            true
        } else {
            return Err(Error::EmbeddingFailed { min_eigenvalue: min, max_eigenvalue: max });
        };

        let mf = m as f64;
        let scale = row
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let lam = z.re.max(0.0);
                let s = if k == 0 || k == half { lam / mf } else { lam / (2.0 * mf) };
                T::lit(s.sqrt())
            })
            .collect();
        let fft = FftPlanner::<T>::new().plan_fft_forward(m);
        Ok(Self { n, m, scale, fft, clipped })
    }

    /// Whether materially negative eigenvalues had to be clipped to zero.
    pub fn clipped(&self) -> bool {
        self.clipped
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// One zero-mean sample of length `n` with the embedded covariance.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let (m, half) = (self.m, self.m / 2);
        let mut z = vec![0.0f64; m];
        fill_normals(rng, &mut z);
        let mut w = vec![Complex::new(T::zero(), T::zero()); m];
        w[0] = Complex::new(self.scale[0] * T::lit(z[0]), T::zero());
        w[half] = Complex::new(self.scale[half] * T::lit(z[1]), T::zero());
        for k in 1..half {
            let s = self.scale[k];
            let c = Complex::new(s * T::lit(z[2 * k]), s * T::lit(z[2 * k + 1]));
            w[k] = c;
            w[m - k] = c.conj();
        }
        self.fft.process(&mut w);
        w.truncate(self.n);
        w.into_iter().map(|c| c.re).collect()
    }
}
