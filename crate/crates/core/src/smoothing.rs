//! Beta-kernel smoothed quantiles over a truncation design.
//!
//! For a design with support `y_1 < ... < y_d` and truncated c.d.f. values
//! `F*_1 <= ... <= F*_d = 1`, the smoothed quantile at level `u` is
//!
//! ```text
//! Q*(u) = sum_j [B(F*_j) - B(F*_{j-1})] y_j,   F*_0 = 0,
//! ```
//!
//! where `B` is the Beta((d+1)u, (d+1)(1-u)) c.d.f.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special_fn::{beta_cdf, BetaParams};
use crate::truncation::TruncationDesign;

/// Weights below this are flushed to zero after the sum-to-one check.
const FLUSH_BELOW: f64 = 1e-300;

fn check_level<T: Scalar>(u: T) -> Result<()> {
    if u > T::zero() && u < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("level must lie in (0, 1), got {u}")))
    }
}

/// Kernel weights `w_j = B(F*_j) - B(F*_{j-1})`, one per support point.
pub fn smoothing_weights<T: Scalar>(design: &TruncationDesign<T>, u: T) -> Result<Vec<T>> {
    check_level(u)?;
    let params = BetaParams::for_level(design.d(), u)?;
    let mut previous = T::zero();
    let mut weights = Vec::with_capacity(design.d());
    for &f in design.f_star() {
        let b = beta_cdf(f, &params)?;
        weights.push((b - previous).max(T::zero()));
        previous = b;
    }
    let total: T = weights.iter().copied().sum();
    if (total - T::one()).abs() > T::WEIGHT_SUM_TOLERANCE {
        return Err(Error::Domain(format!(
            "smoothing weights sum to {total}, expected 1"
        )));
    }
    let flush = T::lit(FLUSH_BELOW);
    for w in &mut weights {
        if *w < flush {
            *w = T::zero();
        }
    }
    Ok(weights)
}

/// Smoothed quantile `Q*(u)` of the design.
pub fn smoothed_quantile<T: Scalar>(design: &TruncationDesign<T>, u: T) -> Result<T> {
    let weights = smoothing_weights(design, u)?;
    Ok(weights
        .iter()
        .zip(design.support())
        .map(|(&w, &y)| w * T::from_int(y))
        .sum())
}

/// Smoothed quantiles at several levels.
pub fn smoothed_quantiles<T: Scalar>(design: &TruncationDesign<T>, levels: &[T]) -> Result<Vec<T>> {
    levels.iter().map(|&u| smoothed_quantile(design, u)).collect()
}

/// Global level matching truncated level `u`: `F(L) + u (F(U) - F(L))`.
pub fn map_truncated_level<T: Scalar>(design: &TruncationDesign<T>, u: T) -> Result<T> {
    check_level(u)?;
    Ok(design.cdf_at_lower() + u * (design.cdf_at_upper() - design.cdf_at_lower()))
}

/// `(u, Q*(u))` pairs on an evenly spaced interior grid of `points` levels.
pub fn quantile_curve<T: Scalar>(design: &TruncationDesign<T>, points: usize) -> Result<Vec<(T, T)>> {
    if points == 0 {
        return Err(Error::Domain("curve needs at least one point".into()));
    }
    let step = T::one() / T::from_usize(points + 1).unwrap();
    (1..=points)
        .map(|i| {
            let u = step * T::from_usize(i).unwrap();
            smoothed_quantile(design, u).map(|q| (u, q))
        })
        .collect()
}
