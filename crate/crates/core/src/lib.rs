//! Smoothed quantile estimation for discrete count distributions on infinite
//! domains.
//!
//! A truncation window `[max(-0.5, mean - k sd), mean + k sd]` turns a count
//! model or a sample into a finite design; beta-kernel smoothing over that
//! design gives quantile estimates with a closed-form asymptotic covariance.
//! On top of that sit a bootstrap, C5NS tail summaries and tail probabilities.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar to `f64`.
//!
//! ```
//! use smoothq::{Design, Model, smoothed_quantile};
//!
//! let model: Model = "poisson:lambda=9".parse().unwrap();
//! let design = Design::population(&model, std::f64::consts::PI).unwrap();
//! let median = smoothed_quantile(&design, 0.5).unwrap();
//! assert!((median - 8.835).abs() < 5e-4);
//! ```

pub mod asymptotics;
pub mod bootstrap;
pub mod distributions;
pub mod empirical;
pub mod error;
pub mod fixtures;
pub mod risk;
pub mod scalar;
pub mod sim;
pub mod smoothing;
pub mod special_fn;
pub mod truncation;

pub use asymptotics::{normal_ci, quantile_covariance, standard_normal_quantile, QuantileCovariance};
pub use bootstrap::{bootstrap_quantiles, BootstrapSummary, ResampleConfig};
pub use distributions::{CountModel, ModelKind, Moments};
pub use empirical::DiscreteSample;
pub use error::{Error, Result};
pub use risk::{
    c5ns_levels, c5ns_summary, interpolated_tail_prob, smoothed_tail_prob, tail_prob_bootstrap,
    C5nsResult, TailMethod, TailProbEstimate,
};
pub use scalar::Scalar;
pub use sim::{run_study, StudyConfig, StudyMode, StudyReport};
pub use smoothing::{map_truncated_level, quantile_curve, smoothed_quantile, smoothed_quantiles, smoothing_weights};
pub use special_fn::{beta_cdf, beta_pdf, BetaParams};
pub use truncation::{coverage_bound, parse_k, SupportRule, TruncationDesign};

pub type Model = CountModel<f64>;
pub type Design = TruncationDesign<f64>;
pub type Covariance = QuantileCovariance<f64>;
pub type Bootstrap = BootstrapSummary<f64>;
pub type C5ns = C5nsResult<f64>;
pub type TailEstimate = TailProbEstimate<f64>;
pub type Study = StudyConfig<f64>;
pub type Report = StudyReport<f64>;
