//! Tail-risk summaries: the conditional five number summary (C5NS) beyond
//! VaR_p and smoothed versus interpolated tail probabilities.
//!
//! The conditional tail median is not estimated separately. It coincides with
//! the middle C5NS level only for continuous laws, so the quantile at
//! `0.5p + 0.5` is reported instead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{normal_ci, quantile_covariance};
use crate::bootstrap::{column_means, replicate, resample, sample_covariance, ResampleConfig};
use crate::empirical::DiscreteSample;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smoothing::{map_truncated_level, smoothed_quantile};
use crate::truncation::{SupportRule, TruncationDesign};

const BISECTION_BRACKET: f64 = 1e-9;
const BISECTION_TOLERANCE: f64 = 1e-12;
const BISECTION_MAX_ITERATIONS: usize = 200;

/// The five C5NS levels `(0.9p+0.1, 0.75p+0.25, 0.5p+0.5, 0.25p+0.75, 0.1p+0.9)`.
pub fn c5ns_levels<T: Scalar>(p: T) -> Result<[T; 5]> {
    if !(p >= T::zero() && p < T::one()) {
        return Err(Error::Domain(format!("VaR level must lie in [0, 1), got {p}")));
    }
    Ok([(0.9, 0.1), (0.75, 0.25), (0.5, 0.5), (0.25, 0.75), (0.1, 0.9)]
        .map(|(w, c)| T::lit(w) * p + T::lit(c)))
}

/// Classical VaR: the smallest observed value whose ecdf reaches `p`.
pub fn empirical_var(sample: &DiscreteSample, p: f64) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("VaR level must lie in (0, 1], got {p}")));
    }
    let n = sample.n() as f64;
    Ok(sample
        .values()
        .iter()
        .copied()
        .find(|&v| sample.count_at_most(v as i64) as f64 >= p * n)
        .unwrap_or_else(|| sample.max_value()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct C5nsResult<T> {
    pub p: T,
    pub levels: [T; 5],
    pub quantiles: [T; 5],
    pub intervals: [(T, T); 5],
    pub confidence: T,
    /// Smoothed quantile at level `p`.
    pub var_smoothed: T,
    /// Generalized-inverse VaR on the raw ecdf.
    pub var_empirical: u64,
}

/// C5NS point estimates with normal intervals from the plug-in asymptotic covariance.
pub fn c5ns_summary<T: Scalar>(
    sample: &DiscreteSample,
    p: T,
    k: T,
    confidence: T,
    rule: SupportRule,
) -> Result<C5nsResult<T>> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::Domain(format!("VaR level must lie in (0, 1), got {p}")));
    }
    let levels = c5ns_levels(p)?;
    let design = TruncationDesign::empirical(sample, k, rule)?;
    let qc = quantile_covariance(&design, &levels, sample.n())?;
    let ci = normal_ci(&qc, confidence)?;
    Ok(C5nsResult {
        p,
        levels,
        quantiles: std::array::from_fn(|i| qc.estimates[i]),
        intervals: std::array::from_fn(|i| ci[i]),
        confidence,
        var_smoothed: smoothed_quantile(&design, p)?,
        var_empirical: empirical_var(sample, p.to_f64_lossy())?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMethod {
    Smoothed,
    Interpolated,
}

impl fmt::Display for TailMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailMethod::Smoothed => "smoothed",
            TailMethod::Interpolated => "interpolated",
        })
    }
}

impl FromStr for TailMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "smoothed" => Ok(TailMethod::Smoothed),
            "interpolated" => Ok(TailMethod::Interpolated),
            other => Err(Error::Parse(format!("unknown tail method {other:?}"))),
        }
    }
}

/// Threshold used on the smoothed scale: integers move up by one half.
pub fn continuity_corrected<T: Scalar>(a: T) -> T {
    if a.fract() == T::zero() {
        a + T::lit(0.5)
    } else {
        a
    }
}

/// Smallest level `u` with `Q*(u) >= target`, by bisection. `None` when the
/// target lies outside the range of `Q*`; the flag tells which side.
fn invert_quantile<T: Scalar>(design: &TruncationDesign<T>, target: T) -> Result<std::result::Result<T, bool>> {
    let mut lo = T::lit(BISECTION_BRACKET);
    let mut hi = T::one() - lo;
    if smoothed_quantile(design, lo)? >= target {
        return Ok(Err(false));
    }
    if smoothed_quantile(design, hi)? < target {
        return Ok(Err(true));
    }
    let tol = T::lit(BISECTION_TOLERANCE);
    for _ in 0..BISECTION_MAX_ITERATIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if smoothed_quantile(design, mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Ok(hi))
}

/// `P(Y > a)` read off the smoothed quantile curve of `design`.
///
/// Targets above the curve give `1 - F(U)`, targets below give `1 - F(L)`.
pub fn smoothed_tail_prob_design<T: Scalar>(design: &TruncationDesign<T>, a: T) -> Result<T> {
    let target = continuity_corrected(a);
    let prob = match invert_quantile(design, target)? {
        Ok(u) => T::one() - map_truncated_level(design, u)?,
        Err(true) => T::one() - design.cdf_at_upper(),
        Err(false) => T::one() - design.cdf_at_lower(),
    };
    Ok(prob.max(T::zero()).min(T::one()))
}

/// Smoothed tail probability of a sample.
pub fn smoothed_tail_prob<T: Scalar>(sample: &DiscreteSample, k: T, a: T, rule: SupportRule) -> Result<T> {
    if sample.distinct() < 2 {
        return Err(Error::DegenerateSample);
    }
    smoothed_tail_prob_design(&TruncationDesign::empirical(sample, k, rule)?, a)
}

/// Tail probability from the ecdf, linearly interpolated between integers.
pub fn interpolated_tail_prob<T: Scalar>(sample: &DiscreteSample, a: T) -> T {
    let above = |b: T| T::one() - sample.ecdf(b);
    let b = a.floor();
    let f = a - b;
    if f == T::zero() {
        above(b)
    } else {
        (T::one() - f) * above(b) + f * above(b + T::one())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TailProbEstimate<T> {
    pub threshold: T,
    /// Threshold actually evaluated (continuity corrected for the smoothed method).
    pub evaluated_at: T,
    pub method: TailMethod,
    /// Estimate on the original sample.
    pub point: T,
    /// Bootstrap mean.
    pub mean: T,
    /// Bootstrap standard deviation (`m - 1` divisor).
    pub sd: T,
    /// `sd / mean`; absent when the mean is zero.
    pub cv: Option<T>,
    pub m: usize,
}

fn tail_probs<T: Scalar>(
    sample: &DiscreteSample,
    thresholds: &[T],
    method: TailMethod,
    k: T,
    rule: SupportRule,
) -> Result<Vec<T>> {
    match method {
        TailMethod::Interpolated => Ok(thresholds
            .iter()
            .map(|&a| interpolated_tail_prob(sample, a))
            .collect()),
        TailMethod::Smoothed => {
            let design = TruncationDesign::empirical(sample, k, rule)?;
            thresholds
                .iter()
                .map(|&a| smoothed_tail_prob_design(&design, a))
                .collect()
        }
    }
}

/// Bootstrap mean, sd and cv of tail probabilities at each threshold. All
/// thresholds share the same resamples.
pub fn tail_prob_bootstrap<T: Scalar>(
    sample: &DiscreteSample,
    thresholds: &[T],
    method: TailMethod,
    k: T,
    rule: SupportRule,
    cfg: &ResampleConfig,
) -> Result<Vec<TailProbEstimate<T>>> {
    if sample.distinct() < 2 {
        return Err(Error::DegenerateSample);
    }
    if cfg.m < 2 {
        return Err(Error::Domain("bootstrap needs at least two replicates".into()));
    }
    let points = tail_probs(sample, thresholds, method, k, rule)?;
    let run = replicate(cfg, |rng| {
        let resampled = resample(sample, rng);
        if resampled.distinct() < 2 {
            return Ok(None);
        }
        tail_probs(&resampled, thresholds, method, k, rule).map(Some)
    })?;
    let means = column_means(&run.values);
    let cov = sample_covariance(&run.values).expect("m >= 2");
    Ok(thresholds
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let sd = cov[j][j].max(T::zero()).sqrt();
            TailProbEstimate {
                threshold: a,
                evaluated_at: match method {
                    TailMethod::Smoothed => continuity_corrected(a),
                    TailMethod::Interpolated => a,
                },
                method,
                point: points[j],
                mean: means[j],
                sd,
                cv: (means[j] > T::zero()).then(|| sd / means[j]),
                m: cfg.m,
            }
        })
        .collect())
}
