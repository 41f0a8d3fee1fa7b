//! Scalar abstraction shared by every numerical module.

use nalgebra as na;
use num_traits as nt;

/// Complex numbers over a [`Real`] scalar.
pub type Cplx<T> = na::Complex<T>;

/// Floating point types the library can be instantiated with.
///
/// Everything numerical is written against this trait; `f64` is the type the
/// physics is validated with, `f32` is supported for cheap exploratory runs.
pub trait Real:
    na::RealField + Copy + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + Send + Sync
{
    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub fn lit<T: Real>(x: f64) -> T {
    na::convert(x)
}

/// Converts an integer into `T`.
#[inline(always)]
pub fn from_int<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("integer representable in scalar type")
}

/// Lossy conversion to `f64`, used for reporting.
#[inline(always)]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `exp(i·phase)`.
#[inline(always)]
pub fn cis<T: Real>(phase: T) -> Cplx<T> {
    let (s, c) = phase.sin_cos();
    Cplx::new(c, s)
}

/// Modulus of a complex number.
#[inline(always)]
pub fn modulus<T: Real>(z: Cplx<T>) -> T {
    z.re.hypot(z.im)
}

#[inline(always)]
pub fn real<T: Real>(x: T) -> Cplx<T> {
    Cplx::new(x, T::zero())
}

#[inline(always)]
pub fn imag<T: Real>(x: T) -> Cplx<T> {
    Cplx::new(T::zero(), x)
}
