//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the models are evaluated in: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Widening conversion used for diagnostics and output.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }

    /// Default gradient tolerance for the Newton solver. 1e-9 for `f64`.
    fn grad_tolerance() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(1e3))
    }

    /// Default equality-constraint tolerance. 1e-8 for `f64`.
    fn constraint_tolerance() -> Self {
        Self::lit(1e-8).max(Self::epsilon() * Self::lit(1e3))
    }

    /// Central-difference step for Hessians built from analytic gradients.
    fn fd_step() -> Self {
        Self::epsilon().cbrt()
    }
}

impl Real for f32 {}
impl Real for f64 {}
