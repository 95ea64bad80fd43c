//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + 'static
{
    /// Literal conversion. Every `f64` constant used by the crate is
    /// representable (possibly rounded) in every implementor.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn of_i64(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`].
pub type Cplx<R> = Complex<R>;

/// Tolerance floor that scales with the precision of `R`: `max(tol, factor·ε)`.
pub fn tol_floor<R: Real>(tol: f64, factor: f64) -> R {
    let t = R::of(tol);
    let e = R::epsilon() * R::of(factor);
    if t > e {
        t
    } else {
        e
    }
}
