use std::marker::PhantomData;

use super::{Kernel, KernelSection, RadialProfile};
use crate::error::Result;
use crate::scalar::{real, Real};

/// The Hankel kernel `φ̃(m, n) = φ̇(m + n)` on `ℕ₀ × ℕ₀`.
///
/// Profiles are stored in `f64`; sections are produced in `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelKernel<R = f64> {
    profile: RadialProfile,
    _field: PhantomData<R>,
}

pub fn lift_radial<R: Real>(profile: &RadialProfile) -> HankelKernel<R> {
    HankelKernel::new(profile.clone())
}

impl<R: Real> HankelKernel<R> {
    pub fn new(profile: RadialProfile) -> Self {
        HankelKernel { profile, _field: PhantomData }
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// `φ̇(k)`.
    pub fn dot(&self, k: usize) -> R {
        real(self.profile.value(k))
    }

    pub fn get(&self, m: usize, n: usize) -> R {
        self.dot(m + n)
    }

    /// `φ̃ ∘ σ`, again Hankel with generating sequence `k ↦ φ̇(k + 2)`.
    pub fn shift_sigma(&self) -> Self {
        Self::new(self.profile.shifted(2))
    }

    pub fn exp_scale(&self, t: f64) -> Result<Self> {
        Ok(Self::new(self.profile.exp_scaled(t)?))
    }

    /// `h = φ̃ − φ̃∘σ`.
    pub fn hankel_h(&self) -> Self {
        Self::new(self.profile.second_difference())
    }
}

impl<R: Real> KernelSection<R> for HankelKernel<R> {
    fn max_section(&self) -> Option<usize> {
        None
    }

    fn section(&self, n: usize) -> Result<Kernel<R>> {
        let values: Vec<R> = (0..2 * n.max(1)).map(|k| self.dot(k)).collect();
        Kernel::from_fn(n, |i, j| values[i + j])
    }
}
