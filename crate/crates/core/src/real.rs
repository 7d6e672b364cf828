//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the library (`f32` or `f64`).
///
/// On top of [`Float`] this adds the two special functions that the
/// standard library does not expose: the complementary error function and
/// the log-gamma function.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + ScalarOperand
    + Send
    + Sync
    + 'static
{
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Natural log of |Γ(x)|.
    fn ln_gamma(self) -> Self;

    /// Converts an `f64` literal, panicking only if it cannot be represented
    /// at all (never the case for finite constants in `f32`/`f64`).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    /// Converts a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    /// Lossy conversion to `f64` (always succeeds for `f32`/`f64`).
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    #[inline]
    fn ln_gamma(self) -> Self {
        libm::lgamma(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    #[inline]
    fn ln_gamma(self) -> Self {
        libm::lgammaf(self)
    }
}
