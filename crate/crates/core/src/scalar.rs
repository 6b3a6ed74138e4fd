use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the engine is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Modulus above which an evaluation is snapped to the point at infinity.
    fn overflow_limit() -> Self;

    /// Absolute tolerance used for row sums and stationary residuals.
    fn stochastic_tol() -> Self;

    /// Lossy conversion from `f64`; used for literals and config values.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f64 {
    fn overflow_limit() -> Self {
        1e150
    }

    fn stochastic_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    // sqrt(f32::MAX) keeps |z|^2 representable
    fn overflow_limit() -> Self {
        1.8e19
    }

    fn stochastic_tol() -> Self {
        1e-5
    }
}
