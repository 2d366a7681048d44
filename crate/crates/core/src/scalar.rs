//! Scalar abstraction for the reduced-unit kernel.

use core::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type the numerical kernel is generic over.
///
/// Implemented for `f32` and `f64`. The dense linear algebra is delegated to
/// `faer`, hence the `RealField` bound.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + faer::traits::RealField<Unit: faer::traits::ComplexField>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold
    /// at all, which never happens for finite `f64` input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `sin(x)/x` with the removable singularity at zero filled in.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        // Taylor series; error below x^6/5040.
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}
