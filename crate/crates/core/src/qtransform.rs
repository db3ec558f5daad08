//! The `q`-calculus for free groups on finitely many generators.
//!
//! `F = (1 − 1/q) Σ τⁿ/qⁿ` and the diagonal recursion `G` translate the
//! homogeneous-tree functionals `χ_φ` into Toeplitz functionals, `χ_φ = ω_{Gφ}`.
//! Both are lower triangular along diagonals, so they act exactly on finite
//! sections.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::definiteness::{is_cond_negative_definite, is_positive_definite, DefinitenessReport};
use crate::error::{Error, Result};
use crate::kernel::{section_with_shift, HankelKernel, Kernel, KernelSection};
use crate::scalar::{real, to_f64, Real, Scalar};
use crate::toeplitz::{
    diagonal_limit_phi0, membership_verdict, section_trace_norm, ColumnTails, MembershipReport, OmegaNormCertificate,
    TailBound, TraceNorm,
};

/// Tree degree minus one; `q = 2n − 1` for the free group on `n` generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct QParam(u32);

impl QParam {
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::param("q", "must be at least 2"));
        }
        Ok(QParam(q))
    }

    pub fn for_generators(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("generators", "must be at least 2"));
        }
        let q = u32::try_from(2 * n - 1).map_err(|_| Error::param("generators", "too many"))?;
        QParam::new(q)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl TryFrom<u32> for QParam {
    type Error = Error;
    fn try_from(q: u32) -> Result<Self> {
        QParam::new(q)
    }
}

impl From<QParam> for u32 {
    fn from(q: QParam) -> u32 {
        q.0
    }
}

fn weights<T: Scalar>(q: QParam) -> (T, T) {
    let inv: T::RealField = real(1.0 / q.as_f64());
    let keep: T::RealField = real(1.0 - 1.0 / q.as_f64());
    (T::from_real(keep), T::from_real(inv))
}

// out(m, n) = a·k(m, n) + b·out(m − 1, n − 1), with out(m, n) = edge(k(m, n))
// when min(m, n) = 0.
fn diagonal_recursion<T: Scalar>(k: &DMatrix<T>, a: T, b: T, edge: impl Fn(T) -> T) -> DMatrix<T> {
    let n = k.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = if i == 0 || j == 0 { edge(k[(i, j)]) } else { a * k[(i, j)] + b * out[(i - 1, j - 1)] };
        }
    }
    out
}

// out(m, n) = a·(k(m, n) − b·k(m − 1, n − 1)), with out = edge(k) on the border.
fn diagonal_difference<T: Scalar>(k: &DMatrix<T>, a: T, b: T, edge: impl Fn(T) -> T) -> DMatrix<T> {
    let n = k.nrows();
    DMatrix::from_fn(n, n, |i, j| if i == 0 || j == 0 { edge(k[(i, j)]) } else { a * (k[(i, j)] - b * k[(i - 1, j - 1)]) })
}

/// `F k = (1 − 1/q) Σ_j τʲk / qʲ`, with `τk(m, n) = k(m − 1, n − 1)`.
pub fn f_apply<T: Scalar>(k: &Kernel<T>, q: QParam) -> Result<Kernel<T>> {
    let (keep, inv) = weights::<T>(q);
    Kernel::new(diagonal_recursion(k.matrix(), keep, inv, |v| keep * v))
}

/// `F⁻¹ = (1 − 1/q)⁻¹ (id − τ/q)`.
pub fn f_inv<T: Scalar>(k: &Kernel<T>, q: QParam) -> Result<Kernel<T>> {
    let (keep, inv) = weights::<T>(q);
    let scale = T::one() / keep;
    Kernel::new(diagonal_difference(k.matrix(), scale, inv, |v| scale * v))
}

/// `Gk(m, n) = k(m, n)` when `min(m, n) = 0`, otherwise
/// `(1 − 1/q) k(m, n) + Gk(m − 1, n − 1)/q`.
pub fn g_apply<T: Scalar>(k: &Kernel<T>, q: QParam) -> Result<Kernel<T>> {
    let (keep, inv) = weights::<T>(q);
    Kernel::new(diagonal_recursion(k.matrix(), keep, inv, |v| v))
}

pub fn g_inv<T: Scalar>(k: &Kernel<T>, q: QParam) -> Result<Kernel<T>> {
    let (keep, inv) = weights::<T>(q);
    Kernel::new(diagonal_difference(k.matrix(), T::one() / keep, inv, |v| v))
}

/// `‖(Gk − Gk∘σ) − F(k − k∘σ)‖∞` on the common section.
pub fn fg_identity_residual<T: Scalar>(k: &Kernel<T>, q: QParam) -> Result<f64> {
    let lhs = g_apply(k, q)?.minus_shift()?;
    let rhs = f_apply(&k.minus_shift()?, q)?;
    Ok(to_f64(lhs.zip_map(&rhs, |a, b| a - b)?.max_abs()))
}

/// `‖χ_φ‖ = ‖Fh‖₁ + |c₊| + |c₋|` on the `n`-section.
///
/// The section of `Fh` only involves the section of `h`. The tail bound adds
/// to the Hankel tail the mass that `F` moves out of the section, at most
/// `2 Σ_{i < n} q^{−(n−i)} c_i` with `c_i` the column tails of `h`.
pub fn chi_norm<R: Real>(phi: &HankelKernel<R>, q: QParam, n: usize) -> Result<OmegaNormCertificate> {
    let phi0 = diagonal_limit_phi0(phi)?;
    let h = phi.hankel_h();
    let fh = f_apply(&h.section(n)?, q)?;
    let value = section_trace_norm(fh.matrix());
    let tail_bound = match ColumnTails::new(h.profile(), n) {
        Some(c) => {
            let qf = q.as_f64();
            let leak: f64 = c.within.iter().enumerate().map(|(i, ci)| qf.powi(-((n - i) as i32)) * ci).sum();
            TailBound::Known(2.0 * c.beyond_section + 2.0 * leak)
        }
        None => TailBound::Unknown,
    };
    Ok(OmegaNormCertificate::assemble(TraceNorm { value, tail_bound, truncation: n, exact: false }, Some(phi0)))
}

/// Section value of `‖F(φ − φ∘σ)‖₁` for an explicit finite kernel.
pub fn chi_norm_kernel<T: Scalar>(phi: &Kernel<T>, q: QParam) -> Result<OmegaNormCertificate> {
    let fh = f_apply(&phi.minus_shift()?, q)?;
    let trace = TraceNorm { value: section_trace_norm(fh.matrix()), tail_bound: TailBound::Unknown, truncation: fh.size(), exact: false };
    Ok(OmegaNormCertificate::assemble(trace, None))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QStateReport<T = f64> {
    /// `F(φ − φ∘σ)`.
    pub f_difference_positive: DefinitenessReport<T>,
    /// `Gφ`.
    pub g_positive: DefinitenessReport<T>,
    pub origin_value: f64,
    pub normalized: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QGeneratorReport<T = f64> {
    /// `Gψ`.
    pub g_conditionally_negative: DefinitenessReport<T>,
    /// `F(ψ∘σ − ψ)`.
    pub f_difference_positive: DefinitenessReport<T>,
    pub origin_value: f64,
    pub vanishes_at_origin: bool,
    pub passed: bool,
}

fn q_sections<T: Scalar, K: KernelSection<T> + ?Sized>(k: &K, n: usize) -> Result<(Kernel<T>, Kernel<T>, T::RealField)> {
    let (base, shifted) = section_with_shift(k, n)?;
    if !base.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let eps = to_f64(base.max_abs()).max(1.0);
    Ok((base, shifted, real(eps)))
}

pub fn q_state_conditions<T: Scalar, K: KernelSection<T> + ?Sized>(
    phi: &K,
    q: QParam,
    n: usize,
    tol: f64,
) -> Result<QStateReport<T>> {
    let (base, shifted, scale) = q_sections(phi, n)?;
    let eps = scale * real(tol);
    let fd = f_apply(&base.zip_map(&shifted, |a, b| a - b)?, q)?;
    let f_difference_positive = is_positive_definite(&fd, eps)?;
    let g_positive = is_positive_definite(&g_apply(&base, q)?, eps)?;
    let origin = base.get(0, 0);
    let normalized = to_f64((origin - T::one()).modulus()) <= to_f64(eps);
    let passed = f_difference_positive.verdict && g_positive.verdict && normalized;
    Ok(QStateReport { f_difference_positive, g_positive, origin_value: to_f64(origin.real()), normalized, passed })
}

pub fn q_generator_conditions<T: Scalar, K: KernelSection<T> + ?Sized>(
    psi: &K,
    q: QParam,
    n: usize,
    tol: f64,
) -> Result<QGeneratorReport<T>> {
    let (base, shifted, scale) = q_sections(psi, n)?;
    let g = g_apply(&base, q)?;
    let gmax = g.max_abs();
    let eps = real::<T::RealField>(tol) * if gmax > scale { gmax } else { scale };
    let g_conditionally_negative = is_cond_negative_definite(&g, eps)?;
    let fd = f_apply(&shifted.zip_map(&base, |a, b| a - b)?, q)?;
    let f_difference_positive = is_positive_definite(&fd, eps)?;
    let origin = base.get(0, 0);
    let vanishes_at_origin = to_f64(origin.modulus()) <= to_f64(eps);
    let passed = g_conditionally_negative.verdict && f_difference_positive.verdict && vanishes_at_origin;
    Ok(QGeneratorReport {
        g_conditionally_negative,
        f_difference_positive,
        origin_value: to_f64(origin.real()),
        vanishes_at_origin,
        passed,
    })
}

/// Evaluates `‖χ_{e^{−tφ}}‖` over the grid and compares with one.
pub fn q_s_membership<R: Real>(
    phi: &HankelKernel<R>,
    q: QParam,
    t_grid: &[f64],
    n: usize,
    tol: f64,
) -> Result<MembershipReport> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::param("t_grid", "must be non-empty with positive entries"));
    }
    let evidence = t_grid
        .par_iter()
        .map(|&t| Ok((t, chi_norm(&phi.exp_scale(t)?, q, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(membership_verdict(evidence, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{lift_radial, RadialProfile};
    use crate::toeplitz::omega_norm_kernel;

    fn q(v: u32) -> QParam {
        QParam::new(v).unwrap()
    }

    fn delta(n: usize, at: usize) -> Kernel {
        Kernel::from_fn(n, |i, j| if i == at && j == at { 1.0 } else { 0.0 }).unwrap()
    }

    fn pseudo_random(n: usize, seed: u64) -> Kernel {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let m = DMatrix::from_fn(n, n, |_, _| next());
        Kernel::new(&m + m.transpose()).unwrap()
    }

    #[test]
    fn q_validation() {
        assert!(QParam::new(1).is_err());
        assert_eq!(QParam::for_generators(2).unwrap().get(), 3);
        assert!(serde_json::from_str::<QParam>("1").is_err());
    }

    #[test]
    fn f_of_delta() {
        let f = f_apply(&delta(6, 0), q(3)).unwrap();
        for k in 0..6 {
            assert!((f.get(k, k) - (2.0 / 3.0) * (1.0f64 / 3.0).powi(k as i32)).abs() < 1e-15);
        }
        assert_eq!(f.get(1, 2), 0.0);
        assert_eq!(f_apply(&Kernel::constant(4, 0.0).unwrap(), q(3)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn g_examples() {
        let one = Kernel::constant(7, 1.0).unwrap();
        assert!((g_apply(&one, q(5)).unwrap().matrix() - one.matrix()).amax() < 1e-15);
        let g = g_apply(&delta(6, 1), q(3)).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
        for j in 1..6 {
            assert!((g.get(j, j) - (2.0 / 3.0) * (1.0f64 / 3.0).powi(j as i32 - 1)).abs() < 1e-15);
        }
        assert_eq!(g.get(1, 2), 0.0);
        let k = pseudo_random(8, 3);
        assert_eq!(g_apply(&k, q(3)).unwrap().get(0, 0), k.get(0, 0));
    }

    #[test]
    fn inverses_and_identity() {
        for qq in [3, 5, 9] {
            let k = pseudo_random(20, qq as u64);
            let back = f_inv(&f_apply(&k, q(qq)).unwrap(), q(qq)).unwrap();
            assert!((back.matrix() - k.matrix()).amax() <= 1e-13);
            let back = g_inv(&g_apply(&k, q(qq)).unwrap(), q(qq)).unwrap();
            assert!((back.matrix() - k.matrix()).amax() <= 1e-13);
            assert!(fg_identity_residual(&k, q(qq)).unwrap() <= 1e-12 * to_f64(k.max_abs()));
        }
        assert_eq!(fg_identity_residual(&Kernel::constant(5, 2.0).unwrap(), q(3)).unwrap(), 0.0);
        assert_eq!(fg_identity_residual(&delta(5, 2), q(3)).unwrap(), 0.0);
    }

    #[test]
    fn chi_of_constant_and_exponential() {
        let one: HankelKernel = lift_radial(&RadialProfile::constant(1.0));
        assert_eq!(chi_norm(&one, q(3), 20).unwrap().total, 1.0);
        let e: HankelKernel = lift_radial(&RadialProfile::exponential(0.5));
        let c = chi_norm(&e, q(3), 300).unwrap();
        assert!((c.total - 1.0).abs() < 1e-6, "{c:?}");
        assert!(c.tail_bound.known().unwrap() < 1e-6);
    }

    #[test]
    fn chi_is_omega_of_g() {
        for qq in [3, 5] {
            let k = pseudo_random(20, 11 * qq as u64);
            let chi = chi_norm_kernel(&k, q(qq)).unwrap().total;
            let omega = omega_norm_kernel(&g_apply(&k, q(qq)).unwrap()).unwrap().total;
            assert!((chi - omega).abs() <= 1e-9 * chi.max(1.0));
        }
    }

    #[test]
    fn q_state_examples() {
        let one: HankelKernel = lift_radial(&RadialProfile::constant(1.0));
        assert!(q_state_conditions(&one, q(3), 10, 1e-10).unwrap().passed);
        let e: HankelKernel = lift_radial(&RadialProfile::exponential(1.0));
        assert!(q_state_conditions(&e, q(3), 40, 1e-10).unwrap().passed);
        let grow = Kernel::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 5.0, 0.0], vec![0.0, 0.0, 30.0]]).unwrap();
        let r = q_state_conditions(&grow, q(3), 2, 1e-10).unwrap();
        assert!(!r.f_difference_positive.verdict);
    }

    #[test]
    fn q_generator_examples() {
        let lin: HankelKernel = lift_radial(&RadialProfile::linear());
        assert!(q_generator_conditions(&lin, q(3), 20, 1e-10).unwrap().passed);
        let zero: HankelKernel = lift_radial(&RadialProfile::constant(0.0));
        assert!(q_generator_conditions(&zero, q(3), 10, 1e-10).unwrap().passed);
        let sq: HankelKernel = lift_radial(&RadialProfile::power(1.0, 2.0));
        assert!(!q_generator_conditions(&sq, q(3), 20, 1e-10).unwrap().passed);
    }

    #[test]
    fn q_membership_examples() {
        let grid = [1.0, 0.3, 0.1, 0.03, 0.01];
        let lin: HankelKernel = lift_radial(&RadialProfile::linear());
        for qq in [3, 5] {
            let r = q_s_membership(&lin, q(qq), &grid, 150, 1e-9).unwrap();
            assert_eq!(r.verdict, crate::toeplitz::Membership::Consistent);
            for (t, c) in &r.evidence {
                assert!(c.total <= 1.0 + 1e-6, "{c:?}");
                if *t >= 0.1 {
                    assert!((c.total - 1.0).abs() < 1e-6, "{c:?}");
                }
            }
        }
        let c: HankelKernel = lift_radial(&RadialProfile::constant(2.0));
        assert_eq!(q_s_membership(&c, q(3), &grid, 30, 1e-9).unwrap().verdict, crate::toeplitz::Membership::Consistent);
        let sq: HankelKernel = lift_radial(&RadialProfile::power(1.0, 2.0));
        assert_eq!(q_s_membership(&sq, q(3), &grid, 100, 1e-9).unwrap().verdict, crate::toeplitz::Membership::NotInS);
    }
}
