//! Positive and conditionally negative definiteness on finite sections, with
//! Gram and distance embeddings as witnesses.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{section_with_shift, Kernel, KernelSection};
use crate::linalg;
use crate::scalar::{from_usize, real, to_f64, Real, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessReport<T = f64> {
    pub verdict: bool,
    /// Smallest eigenvalue for positivity tests, largest compressed
    /// eigenvalue for conditional negativity.
    pub extremal_eigenvalue: f64,
    pub tolerance_used: f64,
    /// Coefficients `c` whose quadratic form violates the inequality.
    pub witness_vector: Option<Vec<T>>,
    /// Size of the section the verdict refers to.
    pub truncation: usize,
}

impl<T> DefinitenessReport<T> {
    fn trivial(truncation: usize, tol: f64) -> Self {
        DefinitenessReport {
            verdict: true,
            extremal_eigenvalue: 0.0,
            tolerance_used: tol,
            witness_vector: None,
            truncation,
        }
    }
}

/// `1e−9 · max |k(i, j)|`.
pub fn default_tolerance<T: Scalar>(k: &Kernel<T>) -> T::RealField {
    k.max_abs() * real(1e-9)
}

fn require_hermitian<T: Scalar>(k: &Kernel<T>) -> Result<()> {
    if k.is_hermitian() {
        Ok(())
    } else {
        Err(Error::NotHermitian)
    }
}

/// Verdict is `λ_min ≥ −tol`.
pub fn is_positive_definite<T: Scalar>(k: &Kernel<T>, tol: T::RealField) -> Result<DefinitenessReport<T>> {
    require_hermitian(k)?;
    Ok(psd_report(k.matrix(), tol))
}

fn psd_report<T: Scalar>(m: &DMatrix<T>, tol: T::RealField) -> DefinitenessReport<T> {
    let n = m.nrows();
    let (values, vectors) = linalg::hermitian_eigen(m);
    let lambda = values[0];
    let verdict = lambda >= -tol;
    DefinitenessReport {
        verdict,
        extremal_eigenvalue: to_f64(lambda),
        tolerance_used: to_f64(tol),
        witness_vector: (!verdict).then(|| vectors.column(0).iter().copied().collect()),
        truncation: n,
    }
}

/// `B(i, j) = k(i, j) − k(i, 0) − k(0, j) + k(0, 0)` for `i, j ≥ 1`.
pub fn compression<T: Scalar>(k: &Kernel<T>) -> DMatrix<T> {
    let n = k.size();
    DMatrix::from_fn(n - 1, n - 1, |i, j| k.get(i + 1, j + 1) - k.get(i + 1, 0) - k.get(0, j + 1) + k.get(0, 0))
}

/// Verdict is `λ_max(B) ≤ tol` for the compression `B` at base point `0`.
///
/// A failing witness is `c = (−Σv, v)` with `v` the top eigenvector of `B`,
/// so that `Σ cᵢ = 0` and `Σ cᵢ c̄ⱼ k(i, j) = λ_max(B)`.
pub fn is_cond_negative_definite<T: Scalar>(k: &Kernel<T>, tol: T::RealField) -> Result<DefinitenessReport<T>> {
    require_hermitian(k)?;
    let n = k.size();
    if n == 1 {
        return Ok(DefinitenessReport::trivial(1, to_f64(tol)));
    }
    let (values, vectors) = linalg::hermitian_eigen(&compression(k));
    let lambda = values[n - 2];
    let verdict = lambda <= tol;
    let witness = (!verdict).then(|| {
        let v = vectors.column(n - 2);
        let total = v.iter().fold(T::zero(), |a, &x| a + x);
        std::iter::once(-total).chain(v.iter().copied()).collect()
    });
    Ok(DefinitenessReport {
        verdict,
        extremal_eigenvalue: to_f64(lambda),
        tolerance_used: to_f64(tol),
        witness_vector: witness,
        truncation: n,
    })
}

/// Vectors `a(0), …, a(N−1)` stored as the rows of `coords`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding<T = f64> {
    pub coords: DMatrix<T>,
}

impl<T: Scalar> Embedding<T> {
    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn vector(&self, i: usize) -> DVector<T> {
        self.coords.row(i).transpose()
    }

    pub fn norm(&self, i: usize) -> T::RealField {
        self.coords.row(i).norm()
    }

    /// `⟨a(i), a(j)⟩`, linear in the first slot.
    pub fn inner(&self, i: usize, j: usize) -> T {
        self.coords.row(i).iter().zip(self.coords.row(j).iter()).fold(T::zero(), |acc, (&x, &y)| acc + x * y.conjugate())
    }

    /// `‖a(i) − a(j)‖²`.
    pub fn dist_sq(&self, i: usize, j: usize) -> T::RealField {
        (self.coords.row(i) - self.coords.row(j)).norm_squared()
    }

    /// Gram matrix `⟨a(i), a(j)⟩`.
    pub fn gram(&self) -> DMatrix<T> {
        &self.coords * self.coords.adjoint()
    }
}

/// `k(i, j) = ⟨a(i), a(j)⟩`. Eigenvalues at most `tol / N` are dropped.
pub fn gram_factorize<T: Scalar>(k: &Kernel<T>, tol: T::RealField) -> Result<Embedding<T>> {
    require_hermitian(k)?;
    factor_psd(k.matrix(), tol)
}

pub(crate) fn factor_psd<T: Scalar>(m: &DMatrix<T>, tol: T::RealField) -> Result<Embedding<T>> {
    let n = m.nrows();
    let (values, vectors) = linalg::hermitian_eigen(m);
    if values.first().is_some_and(|&l| l < -tol) {
        return Err(Error::NotPositive { eigenvalue: to_f64(values[0]), tolerance: to_f64(tol) });
    }
    let cutoff = tol / from_usize(n.max(1));
    let kept: Vec<usize> = (0..n).filter(|&c| values[c] > cutoff).collect();
    let coords = DMatrix::from_fn(n, kept.len(), |r, c| {
        let idx = kept[c];
        vectors[(r, idx)] * T::from_real(values[idx].sqrt())
    });
    Ok(Embedding { coords })
}

/// `k(i, j) = ‖a(i) − a(j)‖²` with `a(0) = 0`, by factoring `−½B`.
pub fn cnd_embed<R: Real>(k: &Kernel<R>, tol: R) -> Result<Embedding<R>> {
    require_hermitian(k)?;
    for i in 0..k.size() {
        let v = k.get(i, i);
        if v.abs() > tol {
            return Err(Error::NonzeroDiagonal { index: i, value: to_f64(v) });
        }
    }
    let report = is_cond_negative_definite(k, tol)?;
    if !report.verdict {
        return Err(Error::NotConditionallyNegative {
            eigenvalue: report.extremal_eigenvalue,
            tolerance: report.tolerance_used,
        });
    }
    let n = k.size();
    let half: R = real(-0.5);
    let g = DMatrix::from_fn(n, n, |i, j| half * (k.get(i, j) - k.get(i, 0) - k.get(0, j) + k.get(0, 0)));
    factor_psd(&g, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchoenbergReport<T = f64> {
    pub cnd: DefinitenessReport<T>,
    /// `(t, positivity of e^{−tk})`, in grid order.
    pub exponentials: Vec<(f64, DefinitenessReport<T>)>,
    /// Whether "CND" agrees with "e^{−tk} PD for every grid t".
    pub consistent: bool,
}

pub fn schoenberg_check<T: Scalar>(
    k: &Kernel<T>,
    t_grid: &[T::RealField],
    tol: T::RealField,
) -> Result<SchoenbergReport<T>> {
    require_hermitian(k)?;
    let cnd = is_cond_negative_definite(k, tol)?;
    let exponentials = t_grid
        .par_iter()
        .map(|&t| Ok((to_f64(t), is_positive_definite(&k.exp_scale(t)?, tol)?)))
        .collect::<Result<Vec<_>>>()?;
    let all_pd = exponentials.iter().all(|(_, r)| r.verdict);
    Ok(SchoenbergReport { consistent: all_pd == cnd.verdict, cnd, exponentials })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EtaReport<T = f64> {
    /// `η_0, …, η_{N−1}` with `⟨η_m, η_n⟩ = (ψ∘σ − ψ)(m, n)`.
    pub eta: Embedding<T>,
    /// `Σ_{k ≤ j} ‖η_k − η_{k+1}‖²` for `j = 0, …, N−2`.
    pub partial_sums: Vec<f64>,
    pub truncation: usize,
}

pub fn cnd_eta_vectors<T: Scalar, K: KernelSection<T> + ?Sized>(
    psi: &K,
    n: usize,
    tol: T::RealField,
) -> Result<EtaReport<T>> {
    let (base, shifted) = section_with_shift(psi, n)?;
    let diff = shifted.zip_map(&base, |a, b| a - b)?;
    let eta = gram_factorize(&diff, tol)?;
    let mut acc = T::RealField::zero();
    let partial_sums = (0..eta.len().saturating_sub(1))
        .map(|k| {
            acc += eta.dist_sq(k, k + 1);
            to_f64(acc)
        })
        .collect();
    Ok(EtaReport { truncation: eta.len(), eta, partial_sums })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{lift_radial, HankelKernel, RadialProfile};

    fn abs_diff(n: usize) -> Kernel {
        Kernel::from_fn(n, |i, j| (i as f64 - j as f64).abs()).unwrap()
    }

    #[test]
    fn all_ones_is_positive() {
        let r = is_positive_definite(&Kernel::constant(3, 1.0).unwrap(), 1e-9).unwrap();
        assert!(r.verdict);
        assert!(r.extremal_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn indefinite_two_by_two_has_witness() {
        let k: Kernel = Kernel::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let r = is_positive_definite(&k, 1e-9).unwrap();
        assert!(!r.verdict);
        assert!((r.extremal_eigenvalue + 1.0).abs() < 1e-12);
        let w = r.witness_vector.unwrap();
        // (1, −1) direction gives 1 − 2 − 2 + 1 = −2 before normalisation
        assert!((w[0] + w[1]).abs() < 1e-12);
        let q = w[0] * w[0] + w[1] * w[1] + 4.0 * w[0] * w[1];
        assert!(q < -0.9);
    }

    #[test]
    fn non_hermitian_rejected() {
        let k: Kernel = Kernel::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(is_positive_definite(&k, 1e-9), Err(Error::NotHermitian));
        assert_eq!(is_cond_negative_definite(&k, 1e-9), Err(Error::NotHermitian));
    }

    #[test]
    fn geometric_section_is_positive() {
        let h: HankelKernel = lift_radial(&RadialProfile::geometric(0.5));
        let r = is_positive_definite(&h.section(10).unwrap(), 1e-12).unwrap();
        assert!(r.verdict);
    }

    #[test]
    fn distance_kernel_is_cnd() {
        assert!(is_cond_negative_definite(&abs_diff(10), 1e-9).unwrap().verdict);
        assert!(is_cond_negative_definite(&Kernel::constant(5, 7.0).unwrap(), 1e-9).unwrap().verdict);
        let sq = Kernel::from_fn(4, |i, j| ((i + j) as f64).powi(2)).unwrap();
        let r = is_cond_negative_definite(&sq, 1e-9).unwrap();
        assert!(!r.verdict);
        let c = r.witness_vector.unwrap();
        assert!(c.iter().sum::<f64>().abs() < 1e-12);
        let form: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| c[i] * c[j] * sq.get(i, j)).sum();
        assert!((form - r.extremal_eigenvalue).abs() < 1e-9);
    }

    #[test]
    fn gram_of_ones_and_identity() {
        let e = gram_factorize(&Kernel::constant(4, 1.0f64).unwrap(), 1e-9).unwrap();
        assert_eq!(e.dim(), 1);
        for i in 0..4 {
            assert!((e.norm(i) - 1.0).abs() < 1e-12);
            assert!((e.vector(i) - e.vector(0)).norm() < 1e-12);
        }
        let e = gram_factorize(&Kernel::<f64>::identity(3).unwrap(), 1e-9).unwrap();
        assert!((e.gram() - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn gram_of_rank_one_geometric() {
        let k = Kernel::from_fn(6, |i, j| 0.5f64.powi((i + j) as i32)).unwrap();
        let e = gram_factorize(&k, 1e-12).unwrap();
        assert_eq!(e.dim(), 1);
        for i in 0..6 {
            assert!((e.norm(i) - 0.5f64.powi(i as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn embeddings() {
        let e = cnd_embed(&abs_diff(6), 1e-9).unwrap();
        assert!(e.norm(0) < 1e-12);
        for i in 0..6 {
            for j in 0..6 {
                assert!((e.dist_sq(i, j) - (i as f64 - j as f64).abs()).abs() < 1e-8);
            }
        }
        let line = Kernel::from_fn(5, |i, j| (i as f64 - j as f64).powi(2)).unwrap();
        let e = cnd_embed(&line, 1e-9).unwrap();
        assert_eq!(e.dim(), 1);
        assert!((e.norm(3) - 3.0).abs() < 1e-9);
        let zero = cnd_embed(&Kernel::constant(3, 0.0).unwrap(), 1e-9).unwrap();
        assert_eq!(zero.dim(), 0);
        let bad = Kernel::constant(3, 1.0).unwrap();
        assert!(matches!(cnd_embed(&bad, 1e-9), Err(Error::NonzeroDiagonal { index: 0, .. })));
    }

    #[test]
    fn schoenberg_on_distance_and_square() {
        let r = schoenberg_check(&abs_diff(8), &[0.1, 1.0, 10.0], 1e-9).unwrap();
        assert!(r.consistent && r.cnd.verdict);
        assert!(r.exponentials.iter().all(|(_, rep)| rep.verdict));
        let sq = Kernel::from_fn(4, |i, j| ((i + j) as f64).powi(2)).unwrap();
        let r = schoenberg_check(&sq, &[0.001, 0.01, 0.1], 1e-12).unwrap();
        assert!(!r.cnd.verdict);
        assert!(r.exponentials.iter().any(|(_, rep)| !rep.verdict));
        assert!(r.consistent);
    }

    #[test]
    fn eta_vectors_of_linear_and_square() {
        let psi: HankelKernel = lift_radial(&RadialProfile::linear());
        let r = cnd_eta_vectors(&psi, 12, 1e-9).unwrap();
        for i in 0..12 {
            assert!((r.eta.norm(i).powi(2) - 2.0).abs() < 1e-9);
        }
        assert!(r.partial_sums.iter().all(|&s| s < 1e-9));
        let zero: HankelKernel = lift_radial(&RadialProfile::constant(0.0));
        assert_eq!(cnd_eta_vectors(&zero, 5, 1e-9).unwrap().eta.dim(), 0);
        let sq: HankelKernel = lift_radial(&RadialProfile::power(1.0, 2.0));
        assert!(matches!(cnd_eta_vectors(&sq, 2, 1e-9), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn complex_hermitian_kernel() {
        use num_complex::Complex64 as C;
        let k = Kernel::from_rows(&[vec![C::new(1.0, 0.0), C::new(0.0, 1.0)], vec![C::new(0.0, -1.0), C::new(1.0, 0.0)]])
            .unwrap();
        let r = is_positive_definite(&k, 1e-12).unwrap();
        assert!(r.verdict);
        let e = gram_factorize(&k, 1e-12).unwrap();
        assert!(linalg::max_abs(&(e.gram() - k.matrix())) < 1e-12);
    }
}
