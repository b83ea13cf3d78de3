//! Asymptotic covariance of a vector of smoothed quantile estimators and the
//! normal-theory intervals built from it.
//!
//! For levels `u_1..u_l` on a design with `d` support points the covariance is
//! `H D H' / n`, where (over `j = 1..d-1`)
//!
//! ```text
//! D_ij = F*_min(i,j) (1 - F*_max(i,j))
//! H_ij = (y_j - y_{j+1}) b_{u_i}(F*_j)
//! ```
//!
//! and `b_u` is the Beta((d+1)u, (d+1)(1-u)) density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smoothing::smoothed_quantile;
use crate::special_fn::{beta_pdf, BetaParams};
use crate::truncation::TruncationDesign;

/// Diagonal entries above `-NEGATIVE_TOLERANCE` are treated as round-off.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct QuantileCovariance<T> {
    pub levels: Vec<T>,
    pub estimates: Vec<T>,
    /// Covariance of the estimates, already divided by `n`.
    pub sigma: Vec<Vec<T>>,
    pub n: u64,
}

impl<T: Scalar> QuantileCovariance<T> {
    /// `n` times the covariance, i.e. `H D H'`.
    pub fn scaled_sigma(&self) -> Vec<Vec<T>> {
        let n = T::from_count(self.n);
        self.sigma
            .iter()
            .map(|row| row.iter().map(|&v| v * n).collect())
            .collect()
    }
}

/// The `H` matrix restricted to the indices `j < d` with `0 < F*_j < 1`.
///
/// Indices with `F*_j` equal to 0 or 1 have identically zero rows and columns
/// in `D`, so they are dropped instead of evaluating the density at a boundary.
pub fn h_matrix<T: Scalar>(design: &TruncationDesign<T>, levels: &[T]) -> Result<(Vec<usize>, Vec<Vec<T>>)> {
    let d = design.d();
    let f = design.f_star();
    let y = design.support();
    let active: Vec<usize> = (0..d - 1)
        .filter(|&j| f[j] > T::zero() && f[j] < T::one())
        .collect();
    let h = levels
        .iter()
        .map(|&u| {
            let params = BetaParams::for_level(d, u)?;
            active
                .iter()
                .map(|&j| Ok(T::from_int(y[j] - y[j + 1]) * beta_pdf(f[j], &params)?))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((active, h))
}

/// The `D` matrix over the given indices.
pub fn d_matrix<T: Scalar>(design: &TruncationDesign<T>, indices: &[usize]) -> Vec<Vec<T>> {
    let f = design.f_star();
    indices
        .iter()
        .map(|&a| {
            indices
                .iter()
                .map(|&b| {
                    let (lo, hi) = if f[a] <= f[b] { (f[a], f[b]) } else { (f[b], f[a]) };
                    lo * (T::one() - hi)
                })
                .collect()
        })
        .collect()
}

/// Smoothed quantile estimates at `levels` and their asymptotic covariance for
/// sample size `n`.
pub fn quantile_covariance<T: Scalar>(
    design: &TruncationDesign<T>,
    levels: &[T],
    n: u64,
) -> Result<QuantileCovariance<T>> {
    if n == 0 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    if levels.is_empty() {
        return Err(Error::Domain("at least one level is required".into()));
    }
    let estimates = levels
        .iter()
        .map(|&u| smoothed_quantile(design, u))
        .collect::<Result<Vec<_>>>()?;
    let (active, h) = h_matrix(design, levels)?;
    let dmat = d_matrix(design, &active);
    let dh: Vec<Vec<T>> = h
        .iter()
        .map(|row| {
            dmat.iter()
                .map(|drow| drow.iter().zip(row).map(|(&a, &b)| a * b).sum())
                .collect()
        })
        .collect();
    let l = levels.len();
    let nf = T::from_count(n);
    let mut sigma = vec![vec![T::zero(); l]; l];
    for i in 0..l {
        for k in i..l {
            let v: T = h[k].iter().zip(&dh[i]).map(|(&a, &b)| a * b).sum::<T>() / nf;
            sigma[i][k] = v;
            sigma[k][i] = v;
        }
    }
    Ok(QuantileCovariance {
        levels: levels.to_vec(),
        estimates,
        sigma,
        n,
    })
}

/// Standard normal c.d.f.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile: rational approximation (relative error ~1e-9)
/// followed by one Newton step on the erfc-based c.d.f.
pub fn standard_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    Ok(x - (standard_normal_cdf(x) - p) / density)
}

/// Pointwise intervals `estimate ± z sqrt(sigma_ii)` at the given confidence.
pub fn normal_ci<T: Scalar>(qc: &QuantileCovariance<T>, confidence: T) -> Result<Vec<(T, T)>> {
    if !(confidence > T::zero() && confidence < T::one()) {
        return Err(Error::Domain(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let z = T::lit(standard_normal_quantile(
        (T::one() + confidence).to_f64_lossy() / 2.0,
    )?);
    qc.estimates
        .iter()
        .enumerate()
        .map(|(i, &est)| {
            let var = qc.sigma[i][i];
            if var < -T::lit(NEGATIVE_TOLERANCE) {
                return Err(Error::NegativeVariance {
                    index: i,
                    value: var.to_f64_lossy(),
                });
            }
            let half = z * var.max(T::zero()).sqrt();
            Ok((est - half, est + half))
        })
        .collect()
}
