//! Positive block completion `[[b, a/C], [(a/C)*, c]] ≥ 0` with unit-bounded
//! diagonals, by Dykstra's alternating projections.

use nalgebra::DMatrix;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{real, to_f64, Scalar};

use super::serde_rows;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct GilbertWitness<T: Scalar = f64> {
    /// The corner blocks are `a / scale` and its adjoint.
    pub scale: f64,
    #[serde(with = "serde_rows")]
    pub b: DMatrix<T>,
    #[serde(with = "serde_rows")]
    pub c: DMatrix<T>,
    /// `max(0, −λ_min)` of the assembled block matrix.
    pub residual: f64,
}

impl<T: Scalar> GilbertWitness<T> {
    /// `[[b, a/scale], [(a/scale)*, c]]`.
    pub fn assemble(&self, a: &DMatrix<T>) -> DMatrix<T> {
        let corner = a * T::from_real(real(1.0 / self.scale));
        assemble(&self.b, &corner, &self.c)
    }

    pub fn max_diagonal(&self) -> (f64, f64) {
        let diag = |m: &DMatrix<T>| (0..m.nrows()).fold(f64::NEG_INFINITY, |acc, i| acc.max(to_f64(m[(i, i)].real())));
        (diag(&self.b), diag(&self.c))
    }

    /// Upper bound on `‖a‖_S` certified by this witness:
    /// `scale · √((β_b + r)(β_c + r))` with `β` the largest diagonal entries.
    pub fn norm_bound(&self) -> f64 {
        let (db, dc) = self.max_diagonal();
        self.scale * ((db.max(0.0) + self.residual) * (dc.max(0.0) + self.residual)).sqrt()
    }
}

pub(crate) fn assemble<T: Scalar>(b: &DMatrix<T>, corner: &DMatrix<T>, c: &DMatrix<T>) -> DMatrix<T> {
    let (m, n) = corner.shape();
    let mut out = DMatrix::zeros(m + n, m + n);
    out.view_mut((0, 0), (m, m)).copy_from(b);
    out.view_mut((0, m), (m, n)).copy_from(corner);
    out.view_mut((m, 0), (n, m)).copy_from(&corner.adjoint());
    out.view_mut((m, m), (n, n)).copy_from(c);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DykstraOptions {
    pub max_iter: usize,
    /// Iterations over which a stalled residual is measured.
    pub stall_window: usize,
    /// Relative improvement below which the residual counts as stalled.
    pub stall_improvement: f64,
}

impl Default for DykstraOptions {
    fn default() -> Self {
        DykstraOptions { max_iter: 20_000, stall_window: 200, stall_improvement: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub enum Feasibility<T: Scalar = f64> {
    Feasible { witness: GilbertWitness<T>, iterations: usize },
    /// The residual stalled above `10·tol`; `residual` is its floor.
    Infeasible { residual: f64, iterations: usize },
}

impl<T: Scalar> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }

    pub fn iterations(&self) -> usize {
        match self {
            Feasibility::Feasible { iterations, .. } | Feasibility::Infeasible { iterations, .. } => *iterations,
        }
    }
}

/// Decides whether `‖a/C‖_S ≤ 1` up to `tol` on the Frobenius residual.
///
/// Running out of iterations without either convergence or a stall is
/// reported as [`Error::Indeterminate`].
pub fn gilbert_feasible<T: Scalar>(a: &DMatrix<T>, scale: f64, tol: f64, options: &DykstraOptions) -> Result<Feasibility<T>> {
    match run(a, scale, tol, options)? {
        Outcome::Decided(f) => Ok(f),
        Outcome::Undecided { residual, iterations, .. } => Err(Error::Indeterminate { scale, residual, iterations }),
    }
}

pub(crate) enum Outcome<T: Scalar> {
    Decided(Feasibility<T>),
    /// Budget exhausted; the last iterate still certifies `witness.norm_bound()`.
    Undecided { witness: GilbertWitness<T>, residual: f64, iterations: usize },
}

pub(crate) fn run<T: Scalar>(a: &DMatrix<T>, scale: f64, tol: f64, options: &DykstraOptions) -> Result<Outcome<T>> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::param("C", "must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::EmptyKernel);
    }
    let corner = a * T::from_real(real(1.0 / scale));
    let constrain = |z: &mut DMatrix<T>| {
        z.view_mut((0, m), (m, n)).copy_from(&corner);
        z.view_mut((m, 0), (n, m)).copy_from(&corner.adjoint());
        for i in 0..m + n {
            let d = z[(i, i)].real();
            let d = if d > T::RealField::one() { T::RealField::one() } else { d };
            z[(i, i)] = T::from_real(d);
        }
    };

    let mut x = assemble(&DMatrix::identity(m, m), &corner, &DMatrix::identity(n, n));
    let mut p = DMatrix::<T>::zeros(m + n, m + n);
    let mut q = DMatrix::<T>::zeros(m + n, m + n);
    let mut history: Vec<f64> = Vec::new();
    for k in 1..=options.max_iter {
        let y = linalg::psd_projection(&(&x + &p));
        p = &x + &p - &y;
        let mut x_next = &y + &q;
        constrain(&mut x_next);
        q = &y + &q - &x_next;
        x = x_next;
        let residual = to_f64((&y - &x).norm());
        history.push(residual);
        if residual <= tol {
            let witness = witness_from(&x, m, n, scale);
            return Ok(Outcome::Decided(Feasibility::Feasible { witness, iterations: k }));
        }
        if k > options.stall_window {
            let old = history[k - 1 - options.stall_window];
            if old - residual < options.stall_improvement * old && residual > 10.0 * tol {
                return Ok(Outcome::Decided(Feasibility::Infeasible { residual, iterations: k }));
            }
        }
    }
    let residual = history.last().copied().unwrap_or(f64::INFINITY);
    Ok(Outcome::Undecided { witness: witness_from(&x, m, n, scale), residual, iterations: options.max_iter })
}

fn witness_from<T: Scalar>(x: &DMatrix<T>, m: usize, n: usize, scale: f64) -> GilbertWitness<T> {
    let mut block = x.clone();
    linalg::symmetrize_in_place(&mut block);
    let (values, _) = linalg::hermitian_eigen(&block);
    let lambda = to_f64(values[0]);
    GilbertWitness {
        scale,
        b: block.view((0, 0), (m, m)).into_owned(),
        c: block.view((m, m), (n, n)).into_owned(),
        residual: (-lambda).max(0.0),
    }
}

/// A witness assembled from an explicit factorization `a = P Q*` whose rows
/// satisfy `‖P_i‖·‖Q_j‖ ≤ max‖P‖·max‖Q‖ ≤ scale`.
pub(crate) fn witness_from_factors<T: Scalar>(
    p: &DMatrix<T>,
    q: &DMatrix<T>,
    max_p: f64,
    max_q: f64,
    scale: f64,
) -> GilbertWitness<T> {
    let balance = if max_p > 0.0 && max_q > 0.0 { (max_q / max_p).sqrt() } else { 1.0 };
    let root = scale.sqrt();
    let ps = p * T::from_real(real(balance / root));
    let qs = q * T::from_real(real(1.0 / (balance * root)));
    let b = &ps * ps.adjoint();
    let c = &qs * qs.adjoint();
    let mut g = DMatrix::zeros(p.nrows() + q.nrows(), p.ncols());
    g.view_mut((0, 0), ps.shape()).copy_from(&ps);
    g.view_mut((p.nrows(), 0), qs.shape()).copy_from(&qs);
    let mut block = &g * g.adjoint();
    linalg::symmetrize_in_place(&mut block);
    let (values, _) = linalg::hermitian_eigen(&block);
    let lambda = values.first().map_or(0.0, |&l| to_f64(l));
    GilbertWitness { scale, b, c, residual: (-lambda).max(0.0) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_at_unit_scale() {
        let a = DMatrix::<f64>::from_element(2, 2, 1.0);
        let f = gilbert_feasible(&a, 1.0, 1e-9, &DykstraOptions::default()).unwrap();
        let Feasibility::Feasible { witness, .. } = f else { panic!("expected feasible") };
        assert!((&witness.b - &a).amax() < 1e-6);
        assert!((&witness.c - &a).amax() < 1e-6);
    }

    #[test]
    fn identity_below_entry_bound() {
        let a = DMatrix::<f64>::identity(2, 2);
        let f = gilbert_feasible(&a, 0.5, 1e-9, &DykstraOptions::default()).unwrap();
        assert!(!f.is_feasible());
    }

    #[test]
    fn rotation_above_its_norm() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]);
        let f = gilbert_feasible(&a, 1.5, 1e-9, &DykstraOptions::default()).unwrap();
        let Feasibility::Feasible { witness, .. } = f else { panic!("expected feasible") };
        let (db, dc) = witness.max_diagonal();
        assert!(db <= 1.0 + 1e-12 && dc <= 1.0 + 1e-12);
        let (values, _) = linalg::hermitian_eigen(&witness.assemble(&a));
        assert!(values[0] >= -witness.residual - 1e-12);
        assert!(witness.norm_bound() <= 1.5 + 1e-6);
    }

    #[test]
    fn bad_scale_rejected() {
        let a = DMatrix::<f64>::identity(2, 2);
        assert!(gilbert_feasible(&a, 0.0, 1e-9, &DykstraOptions::default()).is_err());
    }
}
