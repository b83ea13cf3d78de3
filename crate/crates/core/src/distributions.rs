//! Poisson, negative binomial and their zero-inflated versions.
//!
//! The negative binomial uses the `(r, beta)` parametrization with mean
//! `r beta` and variance `r beta (1 + beta)`, so `P(Y = 0) = (1 + beta)^-r`.
//! A zero-inflated model with total zero mass `c` mixes a structural zero
//! (probability `q = (c - p0) / (1 - p0)`) with the base law.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::empirical::DiscreteSample;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special_fn::ln_gamma;

/// Largest Poisson mean drawn by sequential-search inversion.
const INVERSION_MAX_MEAN: f64 = 30.0;
/// Hard cap on the cached cdf prefix table.
const MAX_CACHE: usize = 10_000_000;

/// Parametric family and parameters of a claim-count model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind<T> {
    Poisson { lambda: T },
    Nb { r: T, beta: T },
    Zip { lambda: T, c: T },
    Zinb { r: T, beta: T, c: T },
}

/// Closed-form summary of a count model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
    /// Zeros produced by the base law.
    pub regular_zero_prop: T,
    /// Structural (inflated) zeros; 0 for non-inflated models.
    pub excess_zero_prop: T,
}

/// A count model with an eagerly built c.d.f. prefix table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelKind<T>", into = "ModelKind<T>")]
#[serde(bound = "T: Scalar")]
pub struct CountModel<T> {
    kind: ModelKind<T>,
    pmf_table: Vec<T>,
    cdf_table: Vec<T>,
}

impl<T: Scalar> TryFrom<ModelKind<T>> for CountModel<T> {
    type Error = Error;

    fn try_from(kind: ModelKind<T>) -> Result<Self> {
        Self::new(kind)
    }
}

impl<T: Scalar> From<CountModel<T>> for ModelKind<T> {
    fn from(m: CountModel<T>) -> Self {
        m.kind
    }
}

fn positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be positive, got {v}")))
    }
}

impl<T: Scalar> CountModel<T> {
    pub fn new(kind: ModelKind<T>) -> Result<Self> {
        match kind {
            ModelKind::Poisson { lambda } => positive("lambda", lambda)?,
            ModelKind::Nb { r, beta } => {
                positive("r", r)?;
                positive("beta", beta)?;
            }
            ModelKind::Zip { lambda, c } => {
                positive("lambda", lambda)?;
                Self::check_inflation(c, (-lambda).exp())?;
            }
            ModelKind::Zinb { r, beta, c } => {
                positive("r", r)?;
                positive("beta", beta)?;
                Self::check_inflation(c, (T::one() + beta).powf(-r))?;
            }
        }
        let mut model = Self {
            kind,
            pmf_table: Vec::new(),
            cdf_table: Vec::new(),
        };
        model.build_cache();
        Ok(model)
    }

    fn check_inflation(c: T, p0: T) -> Result<()> {
        if !(c >= T::zero() && c < T::one()) {
            return Err(Error::InvalidModel(format!(
                "zero proportion c must lie in [0, 1), got {c}"
            )));
        }
        if c < p0 {
            return Err(Error::InvalidModel(format!(
                "zero proportion c = {c} is below the base model's zero probability {p0}"
            )));
        }
        Ok(())
    }

    pub fn poisson(lambda: T) -> Result<Self> {
        Self::new(ModelKind::Poisson { lambda })
    }

    pub fn negative_binomial(r: T, beta: T) -> Result<Self> {
        Self::new(ModelKind::Nb { r, beta })
    }

    pub fn zip(lambda: T, c: T) -> Result<Self> {
        Self::new(ModelKind::Zip { lambda, c })
    }

    pub fn zinb(r: T, beta: T, c: T) -> Result<Self> {
        Self::new(ModelKind::Zinb { r, beta, c })
    }

    pub fn kind(&self) -> &ModelKind<T> {
        &self.kind
    }

    /// Zero probability of the base (non-inflated) law.
    pub fn base_zero_prob(&self) -> T {
        match self.kind {
            ModelKind::Poisson { lambda } | ModelKind::Zip { lambda, .. } => (-lambda).exp(),
            ModelKind::Nb { r, beta } | ModelKind::Zinb { r, beta, .. } => {
                (T::one() + beta).powf(-r)
            }
        }
    }

    /// Probability that a draw is a structural zero, `(c - p0) / (1 - p0)`.
    pub fn structural_zero_prob(&self) -> T {
        match self.kind {
            ModelKind::Zip { c, .. } | ModelKind::Zinb { c, .. } => {
                let p0 = self.base_zero_prob();
                (c - p0) / (T::one() - p0)
            }
            _ => T::zero(),
        }
    }

    fn base_mean_var(&self) -> (T, T) {
        match self.kind {
            ModelKind::Poisson { lambda } | ModelKind::Zip { lambda, .. } => (lambda, lambda),
            ModelKind::Nb { r, beta } | ModelKind::Zinb { r, beta, .. } => {
                (r * beta, r * beta * (T::one() + beta))
            }
        }
    }

    /// Base-law probability via logs, used beyond the cached table.
    fn base_pmf_direct(&self, y: u64) -> T {
        let yf = T::from_count(y);
        let ln_p = match self.kind {
            ModelKind::Poisson { lambda } | ModelKind::Zip { lambda, .. } => {
                yf * lambda.ln() - lambda - ln_gamma(yf + T::one())
            }
            ModelKind::Nb { r, beta } | ModelKind::Zinb { r, beta, .. } => {
                let one = T::one();
                ln_gamma(r + yf) - ln_gamma(r) - ln_gamma(yf + one) - r * beta.ln_1p()
                    + yf * (beta / (one + beta)).ln()
            }
        };
        ln_p.exp()
    }

    /// Ratio `p(y + 1) / p(y)` of the base law.
    fn base_ratio(&self, y: u64) -> T {
        let yf = T::from_count(y);
        let one = T::one();
        match self.kind {
            ModelKind::Poisson { lambda } | ModelKind::Zip { lambda, .. } => lambda / (yf + one),
            ModelKind::Nb { r, beta } | ModelKind::Zinb { r, beta, .. } => {
                (r + yf) / (yf + one) * beta / (one + beta)
            }
        }
    }

    fn build_cache(&mut self) {
        let q = self.structural_zero_prob();
        let keep = T::one() - q;
        let (mean, _) = self.base_mean_var();
        let threshold = T::one() - T::CDF_TAIL;
        let mut base = self.base_zero_prob();
        let mut cum = T::zero();
        let mut y = 0u64;
        loop {
            let p = if y == 0 { q + keep * base } else { keep * base };
            cum = cum + p;
            self.pmf_table.push(p);
            self.cdf_table.push(cum);
            let past_mode = T::from_count(y) >= mean;
            if (past_mode && cum >= threshold) || self.pmf_table.len() >= MAX_CACHE {
                break;
            }
            base = base * self.base_ratio(y);
            y += 1;
        }
    }

    /// Probability mass at `y`.
    pub fn pmf(&self, y: u64) -> T {
        match self.pmf_table.get(y as usize) {
            Some(&p) => p,
            None => (T::one() - self.structural_zero_prob()) * self.base_pmf_direct(y),
        }
    }

    /// `P(Y <= t)` for any real `t`.
    pub fn cdf(&self, t: T) -> T {
        if t.is_nan() || t < T::zero() {
            return T::zero();
        }
        let last = self.cdf_table.len() - 1;
        let Some(top) = t.floor().to_u64() else {
            return T::one();
        };
        if (top as usize) <= last {
            return self.cdf_table[top as usize];
        }
        // Past the cache the remaining tail is below CDF_TAIL; sum it until it vanishes.
        let keep = T::one() - self.structural_zero_prob();
        let mut cum = self.cdf_table[last];
        let mut base = self.pmf_table[last] / keep;
        let mut y = last as u64;
        while y < top {
            base = base * self.base_ratio(y);
            y += 1;
            let p = keep * base;
            cum = cum + p;
            if p <= cum * T::epsilon() {
                break;
            }
        }
        cum.min(T::one())
    }

    /// Mean, variance and the regular/excess decomposition of the zero mass.
    pub fn moments(&self) -> Moments<T> {
        let (m, v) = self.base_mean_var();
        let p0 = self.base_zero_prob();
        match self.kind {
            ModelKind::Poisson { .. } | ModelKind::Nb { .. } => Moments {
                mean: m,
                variance: v,
                regular_zero_prop: p0,
                excess_zero_prop: T::zero(),
            },
            ModelKind::Zip { c, .. } | ModelKind::Zinb { c, .. } => {
                let one = T::one();
                let keep = (one - c) / (one - p0);
                let q = (c - p0) / (one - p0);
                Moments {
                    mean: keep * m,
                    variance: keep * (v + m * m * q),
                    regular_zero_prop: p0 * keep,
                    excess_zero_prop: q,
                }
            }
        }
    }

    fn draw_base<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.kind {
            ModelKind::Poisson { lambda } | ModelKind::Zip { lambda, .. } => {
                draw_poisson(lambda.to_f64_lossy(), rng)
            }
            ModelKind::Nb { r, beta } | ModelKind::Zinb { r, beta, .. } => {
                let gamma = Gamma::new(r.to_f64_lossy(), beta.to_f64_lossy())
                    .expect("validated gamma parameters");
                draw_poisson(gamma.sample(rng), rng)
            }
        }
    }

    /// One draw. Zero-inflated models first decide on a structural zero.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let q = self.structural_zero_prob().to_f64_lossy();
        if q > 0.0 && rng.random::<f64>() < q {
            return 0;
        }
        self.draw_base(rng)
    }

    /// Draws `n` observations into a frequency table.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DiscreteSample> {
        if n == 0 {
            return Err(Error::InvalidSample("sample size must be positive".into()));
        }
        let mut dense: Vec<u64> = Vec::new();
        for _ in 0..n {
            let y = self.draw(rng) as usize;
            if y >= dense.len() {
                dense.resize(y + 1, 0);
            }
            dense[y] += 1;
        }
        DiscreteSample::from_dense(&dense)
    }
}

/// Poisson draw: sequential-search inversion for small means.
fn draw_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda > INVERSION_MAX_MEAN {
        return Poisson::new(lambda).expect("positive mean").sample(rng) as u64;
    }
    let u: f64 = rng.random();
    let mut y = 0u64;
    let mut p = (-lambda).exp();
    let mut cum = p;
    while u > cum {
        y += 1;
        p *= lambda / y as f64;
        let next = cum + p;
        if next == cum {
            break;
        }
        cum = next;
    }
    y
}

impl<T: Scalar> fmt::Display for CountModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ModelKind::Poisson { lambda } => write!(f, "poisson:lambda={lambda}"),
            ModelKind::Nb { r, beta } => write!(f, "nb:r={r},beta={beta}"),
            ModelKind::Zip { lambda, c } => write!(f, "zip:lambda={lambda},c={c}"),
            ModelKind::Zinb { r, beta, c } => write!(f, "zinb:r={r},beta={beta},c={c}"),
        }
    }
}

impl<T: Scalar> FromStr for CountModel<T> {
    type Err = Error;

    /// Parses `poisson:lambda=9`, `nb:r=9,beta=1`, `zip:lambda=1,c=0.8`,
    /// `zinb:r=1,beta=1,c=0.8`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("model {s:?} lacks `family:` prefix")))?;
        let mut params = std::collections::BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("parameter {part:?} is not key=value")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("parameter {key} = {value:?} is not a number")))?;
            params.insert(key.trim().to_ascii_lowercase(), T::lit(v));
        }
        let mut take = |key: &str| {
            params
                .remove(key)
                .ok_or_else(|| Error::Parse(format!("model {s:?} is missing `{key}`")))
        };
        let kind = match family.trim().to_ascii_lowercase().as_str() {
            "poisson" => ModelKind::Poisson {
                lambda: take("lambda")?,
            },
            "nb" => ModelKind::Nb {
                r: take("r")?,
                beta: take("beta")?,
            },
            "zip" => ModelKind::Zip {
                lambda: take("lambda")?,
                c: take("c")?,
            },
            "zinb" => ModelKind::Zinb {
                r: take("r")?,
                beta: take("beta")?,
                c: take("c")?,
            },
            other => return Err(Error::Parse(format!("unknown model family {other:?}"))),
        };
        if let Some(extra) = params.keys().next() {
            return Err(Error::Parse(format!("unexpected parameter `{extra}` in {s:?}")));
        }
        Self::new(kind)
    }
}
