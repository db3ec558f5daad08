//! Finite-level maps `R`, `S` with `φ(y⁻¹x) ≈ ‖R(x) − R(y)‖² + ‖S(x) + S(y)‖²`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::definiteness::{cnd_embed, is_positive_definite};
use crate::error::{Error, Result};
use crate::free_group::{enumerate_ball, group_matrix};
use crate::kernel::{Kernel, RadialProfile};
use crate::scalar::{real, to_f64, Real, Scalar};
use crate::schur::{gilbert_feasible, DykstraOptions, Feasibility};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Completion {
    /// `e^{−φ/n}` is itself positive, so `[[k, k], [k, k]]` completes it.
    PositiveKernel,
    Dykstra { iterations: usize, residual: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct RsSplit<T: Scalar = f64> {
    pub level: usize,
    /// `R(x)` as row `x`.
    #[serde(with = "crate::schur::serde_rows")]
    pub r: DMatrix<T>,
    #[serde(with = "crate::schur::serde_rows")]
    pub s: DMatrix<T>,
    /// `max |‖R(x) − R(y)‖² + ‖S(x) + S(y)‖² − φ(x, y)|`.
    pub residual: f64,
    /// The same against the level target `n(1 − e^{−φ(x, y)/n})`.
    pub level_residual: f64,
    pub completion: Completion,
}

/// Completes `e^{−φ/n}` to a positive block matrix with unit diagonal, embeds
/// `n(1 − ·)` of it on the doubled index set as `x⁺ ↦ P(x)`, `x⁻ ↦ Q(x)`, and
/// returns `R = (P + Q)/2`, `S = (P − Q)/2`.
pub fn extract_rs<R: Real>(phi: &Kernel<R>, level: usize, tol: f64) -> Result<RsSplit<R>> {
    if level == 0 {
        return Err(Error::param("level", "must be positive"));
    }
    if !phi.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    let m = phi.size();
    let nf = level as f64;
    let a = phi.exp_scale(real(1.0 / nf))?;
    let unit_diagonal = (0..m).all(|i| to_f64(a.get(i, i)) <= 1.0 + tol);
    let positive = unit_diagonal && is_positive_definite(&a, real(tol))?.verdict;
    let (b, c, completion, slack) = if positive {
        (a.matrix().clone(), a.matrix().clone(), Completion::PositiveKernel, 0.0)
    } else {
        match gilbert_feasible(a.matrix(), 1.0, tol, &DykstraOptions::default())? {
            Feasibility::Feasible { witness, iterations } => {
                let residual = witness.residual;
                (witness.b, witness.c, Completion::Dykstra { iterations, residual }, residual)
            }
            Feasibility::Infeasible { residual, .. } => {
                return Err(Error::ConditionFailed {
                    condition: "block completion".into(),
                    detail: format!("φ not a contractive semigroup at scale 1/{level} (residual {residual:e})"),
                });
            }
        }
    };

    let big = 2 * m;
    let n_r: R = real(nf);
    let one = R::one();
    let entry = |i: usize, j: usize| -> R {
        if i == j {
            return one;
        }
        match (i < m, j < m) {
            (true, true) => b[(i, j)],
            (false, false) => c[(i - m, j - m)],
            (true, false) => a.get(i, j - m),
            (false, true) => a.get(j, i - m),
        }
    };
    let distance = Kernel::from_fn(big, |i, j| n_r * (one - entry(i, j)))?;
    let embedding = cnd_embed(&distance, real(nf * (tol + slack)))?;
    let p = embedding.coords.rows(0, m).into_owned();
    let q = embedding.coords.rows(m, m).into_owned();
    let half: R = real(0.5);
    let r = (&p + &q) * half;
    let s = (&p - &q) * half;

    let mut residual = 0.0f64;
    let mut level_residual = 0.0f64;
    for x in 0..m {
        for y in 0..m {
            let form = to_f64((r.row(x) - r.row(y)).norm_squared() + (s.row(x) + s.row(y)).norm_squared());
            let target = to_f64(phi.get(x, y));
            let level_target = nf * (1.0 - (-target / nf).exp());
            residual = residual.max((form - target).abs());
            level_residual = level_residual.max((form - level_target).abs());
        }
    }
    Ok(RsSplit { level, r, s, residual, level_residual, completion })
}

/// [`extract_rs`] on the ball of radius `radius` in `F_generators`.
pub fn extract_rs_radial(
    profile: &RadialProfile,
    generators: usize,
    radius: usize,
    level: usize,
    tol: f64,
) -> Result<RsSplit<f64>> {
    let ball = enumerate_ball(generators, radius)?;
    extract_rs(&group_matrix::<f64>(profile, &ball)?, level, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_function() {
        let c = 2.0;
        let tol = 1e-9;
        let k = Kernel::constant(5, c).unwrap();
        let mut previous = f64::INFINITY;
        for level in [1, 2, 5, 10, 50, 200] {
            let split = extract_rs(&k, level, tol).unwrap();
            assert!(split.level_residual <= 10.0 * tol, "{level}: {}", split.level_residual);
            assert!(split.residual < previous);
            previous = split.residual;
        }
        assert!(previous < c * c / 200.0);
    }

    #[test]
    fn word_length_on_f2() {
        let mut previous = f64::INFINITY;
        for level in [2, 8, 32, 128] {
            let split = extract_rs_radial(&RadialProfile::linear(), 2, 2, level, 1e-9).unwrap();
            assert_eq!(split.completion, Completion::PositiveKernel);
            assert!(split.s.amax() < 1e-6);
            assert!(split.level_residual < 1e-7);
            assert!(split.residual < previous);
            previous = split.residual;
        }
    }

    #[test]
    fn squared_length_is_infeasible() {
        let err = extract_rs_radial(&RadialProfile::power(1.0, 2.0), 2, 2, 8, 1e-9).unwrap_err();
        assert!(matches!(err, Error::ConditionFailed { .. }), "{err}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(extract_rs(&Kernel::constant(3, 1.0).unwrap(), 0, 1e-9).is_err());
        let k = Kernel::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(extract_rs(&k, 1, 1e-9), Err(Error::NotHermitian));
    }
}
