//! Floating-point abstraction used by the LP solver.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the simplex solver runs on.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Smallest tolerance that still makes sense at this precision. Default
    /// tolerances are clamped from below by this value.
    fn tolerance_floor() -> Self;

    /// Converts an `f64` literal; panics only for values the type cannot hold at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    #[inline]
    fn tolerance_floor() -> Self {
        0.0
    }
}

impl Scalar for f32 {
    #[inline]
    fn tolerance_floor() -> Self {
        2e-5
    }
}
