//! Scalar abstraction shared by the numerical kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point type usable by the simulator: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + rustfft::FftNum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into this type.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Lossy conversion to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Tolerances used across the crate.
pub mod tol {
    /// Algebraic identities.
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Norm preservation and PSD checks.
    pub const NORM: f64 = 1e-10;
    /// Eigen-residuals and degenerate class detection.
    pub const EIGEN: f64 = 1e-9;
    /// Spectrum matching against a dense eigensolver.
    pub const SPECTRUM: f64 = 1e-8;
}
