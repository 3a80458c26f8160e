//! Detection and attribution of multiscaling in simulated and observed paths.
//!
//! The pipeline: simulate a path ([`process`]), choose moment orders and lags
//! from the data ([`tuning`]), estimate generalised Hurst exponents and the
//! multiscaling proxy `B` ([`ghe`]), and compare `B` with matched-fBm and
//! shuffled surrogates ([`surrogates`], [`hypothesis`]).

pub mod circulant;
pub mod descriptives;
pub mod error;
pub mod ghe;
pub mod hypothesis;
pub mod process;
pub mod rng;
pub mod scalar;
pub mod stable;
pub mod surrogates;
pub mod tuning;

pub use error::{Error, Result};
pub use ghe::{estimate_ghe, GheResult, HqEstimate, MomentGrid, ScalingFit};
pub use hypothesis::{run_two_stage, Classification, TestConfig, TestVerdict};
pub use process::{PathMeta, PathSeries, ProcessParams};
pub use rng::RngSpec;
pub use scalar::Scalar;
pub use tuning::{tune, TuningConfig, TuningResult};

pub type PathSeries64 = PathSeries<f64>;
pub type PathSeries32 = PathSeries<f32>;
pub type GheResult64 = GheResult<f64>;
pub type GheResult32 = GheResult<f32>;
pub type MomentGrid64 = MomentGrid<f64>;
pub type HqEstimate64 = HqEstimate<f64>;
pub type SurrogateBatch64 = surrogates::SurrogateBatch<f64>;
pub type DiagnosticsRecord64 = descriptives::DiagnosticsRecord<f64>;
