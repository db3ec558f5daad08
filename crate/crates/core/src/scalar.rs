//! Scalar abstractions shared by every numerical routine in the crate.
//!
//! Kernels and matrices are generic over [`Scalar`], which covers real and
//! complex fields (`f32`, `f64`, `Complex<f64>`, ...). Routines that only make
//! sense for real-valued functions (radial profiles, embeddings, splittings)
//! are generic over [`Real`] instead.

use nalgebra::{ComplexField, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point field (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync {}

/// Real or complex field whose modulus lives in a [`Real`] type.
pub trait Scalar: ComplexField<RealField: Real> + Copy + Send + Sync {}

impl<T> Scalar for T where T: ComplexField<RealField: Real> + Copy + Send + Sync {}

/// Converts an `f64` literal into `R`.
#[inline]
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal representable in target field")
}

#[inline]
pub fn to_f64<R: Real>(x: R) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn from_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("index representable in target field")
}

