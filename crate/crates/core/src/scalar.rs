//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the estimators are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Relative convergence tolerance of the incomplete-beta continued fraction.
    const CF_TOLERANCE: Self;
    /// Allowed deviation of smoothing weights from summing to one.
    const WEIGHT_SUM_TOLERANCE: Self;
    /// Tail mass below which a model's cdf prefix table stops growing.
    const CDF_TAIL: Self;

    /// Converts an `f64` literal. Every literal used in the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(x: u64) -> Self {
        Self::from_u64(x).expect("count representable in scalar type")
    }

    #[inline]
    fn from_int(x: i64) -> Self {
        Self::from_i64(x).expect("integer representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const CF_TOLERANCE: Self = 1e-14;
    const WEIGHT_SUM_TOLERANCE: Self = 1e-12;
    const CDF_TAIL: Self = 1e-14;
}

impl Scalar for f32 {
    const CF_TOLERANCE: Self = 1e-6;
    const WEIGHT_SUM_TOLERANCE: Self = 1e-5;
    const CDF_TAIL: Self = 1e-6;
}
