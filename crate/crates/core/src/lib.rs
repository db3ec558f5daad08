//! Schur and Herz-Schur multiplier norms, positive and conditionally negative
//! definite kernel certificates, Toeplitz functionals built from radial
//! functions, and the `F`/`G` calculus relating free groups of different rank.
//!
//! Numerical routines are generic over the scalar field; the aliases below
//! fix the common `f64` and `Complex<f64>` instantiations.

pub mod definiteness;
pub mod error;
pub mod experiments;
pub mod free_group;
pub mod kernel;
pub mod linalg;
pub mod littlewood;
pub mod scalar;
pub mod qtransform;
pub mod schur;
pub mod toeplitz;

pub use error::{Error, Result};
pub use kernel::{HankelKernel, Kernel, KernelDocument, KernelSection, RadialProfile, Rule, Tail};
pub use num_complex::Complex64;
pub use scalar::{Real, Scalar};

pub type RealKernel = Kernel<f64>;
pub type ComplexKernel = Kernel<Complex64>;
pub type RealKernel32 = Kernel<f32>;
