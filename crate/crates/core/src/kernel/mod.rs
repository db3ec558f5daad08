//! Finite sections of kernels on `ℕ₀ × ℕ₀` (or any finite index set), radial
//! profiles, their Hankel lifts, and the shift operators `σ`, `τ`, `τ*`.

mod hankel;
mod profile;

pub use hankel::{lift_radial, HankelKernel};
pub use profile::{Envelope, LinearFloor, Limit, ParityLimits, RadialProfile, Rule, Tail};

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Real, Scalar};

/// A dense `N × N` section of a kernel, indices `0..N`.
///
/// The hermitian flag is computed exactly on construction; it is never
/// inferred up to a tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T = f64> {
    entries: DMatrix<T>,
    hermitian: bool,
}

impl<T: Scalar> Kernel<T> {
    pub fn new(entries: DMatrix<T>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyKernel);
        }
        let hermitian = is_exactly_hermitian(&entries);
        Ok(Kernel { entries, hermitian })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, |i, j| f(i, j)))
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyKernel);
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, cols: r.len() });
            }
        }
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn constant(n: usize, value: T) -> Result<Self> {
        Self::from_fn(n, |_, _| value)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn max_abs(&self) -> T::RealField {
        linalg::max_abs(&self.entries)
    }

    /// Leading `n × n` block.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyKernel);
        }
        if n > self.size() {
            return Err(Error::OutOfRange { index: n, len: self.size() });
        }
        Self::new(self.entries.view((0, 0), (n, n)).into_owned())
    }

    /// Restriction to the index list `subset` (in the given order).
    pub fn principal(&self, subset: &[usize]) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::EmptyKernel);
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.size()) {
            return Err(Error::OutOfRange { index: bad, len: self.size() });
        }
        Self::from_fn(subset.len(), |i, j| self.get(subset[i], subset[j]))
    }

    /// `k ∘ σ`, i.e. `(m, n) ↦ k(m + 1, n + 1)`, on the retained `N - 1` block.
    pub fn shift_sigma(&self) -> Result<Self> {
        let n = self.size();
        if n < 2 {
            return Err(Error::EmptyShift);
        }
        Self::new(self.entries.view((1, 1), (n - 1, n - 1)).into_owned())
    }

    /// `τ* = σ-shift`.
    pub fn tau_star(&self) -> Result<Self> {
        self.shift_sigma()
    }

    /// `τ(k)(i, j) = k(i - 1, j - 1)`, zero on row and column `0`.
    ///
    /// The result has size `N + 1`, so `τ*(τ(k)) = k` holds on the whole
    /// section.
    pub fn tau(&self) -> Self {
        let n = self.size();
        let mut out = DMatrix::zeros(n + 1, n + 1);
        out.view_mut((1, 1), (n, n)).copy_from(&self.entries);
        Kernel { entries: out, hermitian: self.hermitian }
    }

    /// Entrywise `exp(-t k)`.
    pub fn exp_scale(&self, t: T::RealField) -> Result<Self> {
        if !(t > T::RealField::zero()) {
            return Err(Error::param("t", "must be positive"));
        }
        let minus_t = T::from_real(-t);
        Self::new(self.entries.map(|v| (v * minus_t).exp()))
    }

    pub fn map(&self, f: impl FnMut(T) -> T) -> Result<Self> {
        Self::new(self.entries.map(f))
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Result<Self> {
        if self.size() != other.size() {
            return Err(Error::SizeMismatch(self.size(), other.size()));
        }
        Self::from_fn(self.size(), |i, j| f(self.get(i, j), other.get(i, j)))
    }

    /// `k - k∘σ` on the `N - 1` block.
    pub fn minus_shift(&self) -> Result<Self> {
        let shifted = self.shift_sigma()?;
        let base = self.truncate(self.size() - 1)?;
        base.zip_map(&shifted, |a, b| a - b)
    }

    /// `k∘σ - k` on the `N - 1` block.
    pub fn shift_minus(&self) -> Result<Self> {
        let shifted = self.shift_sigma()?;
        let base = self.truncate(self.size() - 1)?;
        shifted.zip_map(&base, |a, b| a - b)
    }
}

use num_traits::Zero;

fn is_exactly_hermitian<T: Scalar>(m: &DMatrix<T>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (i..n).all(|j| m[(i, j)] == m[(j, i)].conjugate()))
}

impl<T: Real> Kernel<T> {
    /// The same section viewed as a complex kernel.
    pub fn to_complex(&self) -> Kernel<Complex<T>> {
        Kernel {
            entries: self.entries.map(|v| Complex::new(v, T::zero())),
            hermitian: self.hermitian,
        }
    }
}

/// Anything that can hand out finite sections of a kernel on `ℕ₀ × ℕ₀`.
pub trait KernelSection<T: Scalar> {
    /// Largest available section, `None` when every size is available.
    fn max_section(&self) -> Option<usize>;

    fn section(&self, n: usize) -> Result<Kernel<T>>;
}

impl<T: Scalar> KernelSection<T> for Kernel<T> {
    fn max_section(&self) -> Option<usize> {
        Some(self.size())
    }

    fn section(&self, n: usize) -> Result<Kernel<T>> {
        self.truncate(n)
    }
}

/// Returns the `n'`-sections of `φ` and `φ∘σ`, where `n' = n` when the source
/// can provide `n + 1` indices and `n' = max_section - 1` otherwise.
pub fn section_with_shift<T: Scalar, K: KernelSection<T> + ?Sized>(
    source: &K,
    n: usize,
) -> Result<(Kernel<T>, Kernel<T>)> {
    let available = source.max_section().map_or(n + 1, |m| m.min(n + 1));
    let big = source.section(available)?;
    let shifted = big.shift_sigma()?;
    let base = big.truncate(available - 1)?;
    Ok((base, shifted))
}

/// Wire format for kernels: `{ "n": N, "real": bool, "entries": [...] }` with
/// row-major entries; complex entries are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDocument {
    pub n: usize,
    pub real: bool,
    pub entries: Vec<EntryValue>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryValue {
    Real(f64),
    Complex([f64; 2]),
}

impl KernelDocument {
    fn check_len(&self) -> Result<()> {
        let expected = self.n * self.n;
        if self.n == 0 {
            return Err(Error::EmptyKernel);
        }
        if self.entries.len() != expected {
            return Err(Error::EntryCount { expected, found: self.entries.len() });
        }
        Ok(())
    }

    pub fn to_real(&self) -> Result<Kernel<f64>> {
        self.check_len()?;
        let values = self
            .entries
            .iter()
            .map(|e| match *e {
                EntryValue::Real(v) => Ok(v),
                EntryValue::Complex([re, im]) if im == 0.0 => Ok(re),
                EntryValue::Complex(_) => Err(Error::NotReal),
            })
            .collect::<Result<Vec<_>>>()?;
        Kernel::new(DMatrix::from_row_slice(self.n, self.n, &values))
    }

    pub fn to_complex(&self) -> Result<Kernel<Complex<f64>>> {
        self.check_len()?;
        let values: Vec<Complex<f64>> = self
            .entries
            .iter()
            .map(|e| match *e {
                EntryValue::Real(v) => Complex::new(v, 0.0),
                EntryValue::Complex([re, im]) => Complex::new(re, im),
            })
            .collect();
        Kernel::new(DMatrix::from_row_slice(self.n, self.n, &values))
    }

    pub fn from_real(k: &Kernel<f64>) -> Self {
        let n = k.size();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| EntryValue::Real(k.get(i, j)))
            .collect();
        KernelDocument { n, real: true, entries }
    }

    pub fn from_complex(k: &Kernel<Complex<f64>>) -> Self {
        let n = k.size();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let v = k.get(i, j);
                EntryValue::Complex([v.re, v.im])
            })
            .collect();
        KernelDocument { n, real: false, entries }
    }
}
