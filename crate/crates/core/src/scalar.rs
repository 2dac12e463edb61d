//! Scalar abstraction shared by every numerical module.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn real<T: Real>(re: T) -> Cplx<T> {
    Complex::new(re, T::zero())
}

/// `i * x` for real `x`.
#[inline]
pub(crate) fn imag<T: Real>(im: T) -> Cplx<T> {
    Complex::new(T::zero(), im)
}
