//! Finite truncation windows for count laws on infinite domains.
//!
//! A design cuts the law to `[L, U] = [max(-0.5, mu - k sigma), mu + k sigma]`,
//! places consecutive integer support points `ceil(L) ..= floor(U)` inside it and
//! renormalizes the c.d.f. to the window:
//!
//! ```text
//! F*_j = (F(y_j) - F(L)) / (F(U) - F(L))
//! ```
//!
//! With an irrational `k` neither cut is an integer, so the untruncated c.d.f.
//! is continuous at both cuts. Cuts that land on (or within 1e-9 of) an integer
//! are refused.

use serde::{Deserialize, Serialize};

use crate::distributions::CountModel;
use crate::empirical::DiscreteSample;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower clamp applied to every window: counts are nonnegative.
pub const LOWER_CLAMP: f64 = -0.5;
/// Minimum distance between a cut and the nearest integer.
pub const INTEGER_GUARD: f64 = 1e-9;

/// Which integers inside an empirical window become support points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportRule {
    /// Every integer in `[ceil(L), floor(U)]`.
    #[default]
    Window,
    /// The window clipped to the observed range `[min value, max value]`;
    /// edge points that can never carry mass are dropped, shrinking `d`.
    Observed,
}

impl std::fmt::Display for SupportRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Window => "window",
            Self::Observed => "observed",
        })
    }
}

impl std::str::FromStr for SupportRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "window" => Ok(Self::Window),
            "observed" => Ok(Self::Observed),
            other => Err(Error::Parse(format!(
                "unknown support rule {other:?} (expected window|observed)"
            ))),
        }
    }
}

/// A finite window with its support points and truncated c.d.f. values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TruncationDesign<T> {
    k: Option<T>,
    lower: T,
    upper: T,
    support: Vec<i64>,
    f_star: Vec<T>,
    cdf_at_lower: T,
    cdf_at_upper: T,
}

/// Parses `pi`, `pi2`, `pi3` (or `pi^2`, `pi^3`) or a positive literal.
pub fn parse_k<T: Scalar>(s: &str) -> Result<T> {
    let pi = T::PI();
    let k = match s.trim().to_ascii_lowercase().as_str() {
        "pi" => pi,
        "pi2" | "pi^2" => pi * pi,
        "pi3" | "pi^3" => pi * pi * pi,
        other => T::lit(
            other
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("k must be pi|pi2|pi3 or a number, got {s:?}")))?,
        ),
    };
    if !(k > T::zero() && k.is_finite()) {
        return Err(Error::Domain(format!("k must be positive, got {k}")));
    }
    Ok(k)
}

/// Lower bound on the probability that the window `mean ± k sd` holds an
/// observation: `1 - 1/k^2` for known moments (`n = None`), and the
/// finite-sample bound `1 - floor((n+1)/n ((n-1)/k^2 + 1)) / (n+1)` when the
/// moments are estimated from `n` observations.
pub fn coverage_bound<T: Scalar>(n: Option<u64>, k: T) -> Result<T> {
    if !(k > T::one()) {
        return Err(Error::Domain(format!("coverage bound needs k > 1, got {k}")));
    }
    let one = T::one();
    let k2 = k * k;
    match n {
        None => Ok(one - k2.recip()),
        Some(0) => Err(Error::Domain("sample size must be positive".into())),
        Some(n) => {
            let nf = T::from_count(n);
            let inner = (nf + one) / nf * ((nf - one) / k2 + one);
            Ok(one - inner.floor() / (nf + one))
        }
    }
}

fn check_cut<T: Scalar>(value: T) -> Result<()> {
    if (value - value.round()).abs() < T::lit(INTEGER_GUARD) {
        Err(Error::IntegerCut {
            value: value.to_f64_lossy(),
        })
    } else {
        Ok(())
    }
}

fn window<T: Scalar>(mean: T, sd: T, k: T) -> Result<(T, T)> {
    if !(k > T::zero() && k.is_finite()) {
        return Err(Error::Domain(format!("k must be positive, got {k}")));
    }
    let lower = (mean - k * sd).max(T::lit(LOWER_CLAMP));
    let upper = mean + k * sd;
    check_cut(lower)?;
    check_cut(upper)?;
    Ok((lower, upper))
}

fn endpoints<T: Scalar>(lower: T, upper: T) -> (i64, i64) {
    let first = lower.ceil().to_i64().expect("finite cut");
    let last = upper.floor().to_i64().expect("finite cut");
    (first, last)
}

impl<T: Scalar> TruncationDesign<T> {
    /// Design for a parametric model using its exact mean and standard deviation.
    pub fn population(model: &CountModel<T>, k: T) -> Result<Self> {
        let moments = model.moments();
        let (lower, upper) = window(moments.mean, moments.variance.sqrt(), k)?;
        let (first, last) = endpoints(lower, upper);
        let d = (last - first + 1).max(0) as usize;
        if d < 2 {
            return Err(Error::WindowTooNarrow { d });
        }
        let cdf_at_lower = model.cdf(lower);
        let cdf_at_upper = model.cdf(upper);
        let mass = cdf_at_upper - cdf_at_lower;
        if !(mass > T::zero()) {
            return Err(Error::EmptyWindow);
        }
        let support: Vec<i64> = (first..=last).collect();
        let mut f_star: Vec<T> = support
            .iter()
            .map(|&y| ((model.cdf(T::from_int(y)) - cdf_at_lower) / mass).max(T::zero()).min(T::one()))
            .collect();
        *f_star.last_mut().unwrap() = T::one();
        Ok(Self {
            k: Some(k),
            lower,
            upper,
            support,
            f_star,
            cdf_at_lower,
            cdf_at_upper,
        })
    }

    /// Design for a sample, using the sample mean and the (n - 1) standard deviation.
    pub fn empirical(sample: &DiscreteSample, k: T, rule: SupportRule) -> Result<Self> {
        let (mean, sd) = sample.sample_moments::<T>()?;
        if !(sd > T::zero()) {
            return Err(Error::DegenerateSample);
        }
        let (lower, upper) = window(mean, sd, k)?;
        let (mut first, mut last) = endpoints(lower, upper);
        if rule == SupportRule::Observed {
            first = first.max(sample.min_value() as i64);
            last = last.min(sample.max_value() as i64);
        }
        if last < first {
            return Err(Error::EmptyWindow);
        }
        let d = (last - first + 1) as usize;
        if d < 2 {
            return Err(Error::WindowTooNarrow { d });
        }
        let below = sample.count_at_most(lower.floor().to_i64().unwrap());
        let through_upper = sample.count_at_most(upper.floor().to_i64().unwrap());
        // F(U) accumulated as F(L) plus the in-window frequencies; only valid
        // because no observation lies strictly between L and the first point.
        let in_window: u64 = (first..=last).map(|y| sample.frequency(y)).sum();
        debug_assert!(
            rule == SupportRule::Observed || below + in_window == through_upper,
            "window frequencies disagree with the ecdf at U"
        );
        if in_window == 0 {
            return Err(Error::EmptyWindow);
        }
        let n = T::from_count(sample.n());
        let cdf_at_lower = T::from_count(below) / n;
        let cdf_at_upper = T::from_count(below + in_window) / n;
        let window_count = T::from_count(in_window);
        let support: Vec<i64> = (first..=last).collect();
        let f_star = support
            .iter()
            .map(|&y| T::from_count(sample.count_at_most(y) - below) / window_count)
            .collect();
        Ok(Self {
            k: Some(k),
            lower,
            upper,
            support,
            f_star,
            cdf_at_lower,
            cdf_at_upper,
        })
    }

    /// Design over an explicit finite support, e.g. the distinct values of a
    /// finite-domain law. `cdf` holds the c.d.f. at each support point and must
    /// end at 1; the window is taken as `[first - 1/2, last + 1/2]`.
    pub fn finite(support: Vec<i64>, cdf: Vec<T>) -> Result<Self> {
        if support.len() != cdf.len() {
            return Err(Error::Domain("support and cdf lengths differ".into()));
        }
        if support.len() < 2 {
            return Err(Error::WindowTooNarrow { d: support.len() });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("support must be strictly increasing".into()));
        }
        if cdf.windows(2).any(|w| w[0] > w[1]) || cdf[0] < T::zero() {
            return Err(Error::Domain("cdf values must be nondecreasing in [0, 1]".into()));
        }
        if (*cdf.last().unwrap() - T::one()).abs() > T::WEIGHT_SUM_TOLERANCE {
            return Err(Error::Domain("cdf must reach 1 at the last support point".into()));
        }
        let mut f_star = cdf;
        *f_star.last_mut().unwrap() = T::one();
        let half = T::lit(0.5);
        Ok(Self {
            k: None,
            lower: T::from_int(support[0]) - half,
            upper: T::from_int(*support.last().unwrap()) + half,
            support,
            f_star,
            cdf_at_lower: T::zero(),
            cdf_at_upper: T::one(),
        })
    }

    pub fn k(&self) -> Option<T> {
        self.k
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn y_first(&self) -> i64 {
        self.support[0]
    }

    pub fn y_last(&self) -> i64 {
        *self.support.last().unwrap()
    }

    /// Number of support points.
    pub fn d(&self) -> usize {
        self.support.len()
    }

    /// Truncated c.d.f. at each support point; the last entry is exactly 1.
    pub fn f_star(&self) -> &[T] {
        &self.f_star
    }

    pub fn cdf_at_lower(&self) -> T {
        self.cdf_at_lower
    }

    pub fn cdf_at_upper(&self) -> T {
        self.cdf_at_upper
    }

    /// Returns a copy with every support point shifted by `m`.
    pub fn shifted(&self, m: i64) -> Self {
        let shift = T::from_int(m);
        Self {
            lower: self.lower + shift,
            upper: self.upper + shift,
            support: self.support.iter().map(|y| y + m).collect(),
            ..self.clone()
        }
    }
}
