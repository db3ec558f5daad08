//! Schur multiplier norms of finite matrices.
//!
//! `‖a‖_S ≤ C` exactly when `[[b, a/C], [(a/C)*, c]]` admits a positive
//! completion with `b_ii, c_jj ≤ 1`. The norm is bracketed by a dual lower
//! bound and a factorization upper bound (see [`bounds`]); whatever gap is left
//! is closed by bisection on `C` with Dykstra feasibility tests.

mod bounds;
mod dykstra;

pub use dykstra::{gilbert_feasible, DykstraOptions, Feasibility, GilbertWitness};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::definiteness::factor_psd;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg;
use crate::scalar::{real, to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// Lower and upper bounds already agree at the initial bracket.
    Bracket,
    /// Dual ascent closed the gap.
    DualPrimal,
    /// Bisection with Dykstra feasibility closed the gap.
    Bisection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct NormCertificate<T: Scalar = f64> {
    pub value: f64,
    pub lower_bracket: f64,
    pub upper_bracket: f64,
    /// Ascent rounds plus bisection steps.
    pub iterations: usize,
    pub dykstra_iterations: usize,
    pub method: NormMethod,
    pub tolerance: f64,
    /// Half-width of the final bracket.
    pub error_bound: f64,
    /// Positive completion at `upper_bracket`, absent for the zero matrix.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<GilbertWitness<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurOptions {
    /// Absolute accuracy of the returned value.
    pub tol: f64,
    pub max_ascent_rounds: usize,
    pub dykstra: DykstraOptions,
    /// Times a bisection step may retry with a 4× iteration budget.
    pub widen_attempts: usize,
}

impl Default for SchurOptions {
    fn default() -> Self {
        SchurOptions { tol: 1e-6, max_ascent_rounds: 4000, dykstra: DykstraOptions::default(), widen_attempts: 1 }
    }
}

impl SchurOptions {
    pub fn with_tol(tol: f64) -> Self {
        SchurOptions { tol, ..Self::default() }
    }
}

pub fn schur_norm<T: Scalar>(a: &DMatrix<T>, tol: f64) -> Result<NormCertificate<T>> {
    schur_norm_with(a, &SchurOptions::with_tol(tol))
}

pub fn schur_norm_with<T: Scalar>(a: &DMatrix<T>, options: &SchurOptions) -> Result<NormCertificate<T>> {
    let tol = options.tol;
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::EmptyKernel);
    }
    if a.iter().any(|v| !to_f64(v.modulus()).is_finite()) {
        return Err(Error::param("a", "entries must be finite"));
    }

    // Rigorous initial bracket.
    let mut lower = to_f64(linalg::max_abs(a));
    let mut upper = to_f64(linalg::trace_norm(a))
        .min(to_f64(linalg::max_of(&linalg::row_norms(a))))
        .min(to_f64(linalg::max_of(&linalg::col_norms(a))));
    let mut method = NormMethod::Bracket;
    let mut iterations = 0;
    let mut dykstra_iterations = 0;
    let mut witness = None;

    if upper == 0.0 {
        return Ok(certificate(0.0, 0.0, 0, 0, method, tol, None));
    }

    let mut factors = None;
    if upper - lower > 2.0 * tol {
        method = NormMethod::DualPrimal;
        let b = bounds::dual_primal(a, tol, options.max_ascent_rounds);
        iterations += b.rounds;
        lower = lower.max(b.lower);
        if b.upper < upper {
            upper = b.upper;
            factors = b.factorization;
        }
        // Both ends can be exact, so rounding may cross them by a few ulps.
        upper = upper.max(lower);
    }

    // Fraction of the bracket at which the next probe sits; moves toward the
    // upper end after an undecided probe.
    let mut position = 0.5;
    let mut steps = 0;
    while upper - lower > 2.0 * tol {
        method = NormMethod::Bisection;
        iterations += 1;
        steps += 1;
        if steps > MAX_BISECTION_STEPS {
            return Err(Error::Indeterminate { scale: 0.5 * (lower + upper), residual: upper - lower, iterations: dykstra_iterations });
        }
        let probe = position;
        let scale = lower + probe * (upper - lower);
        position = 0.5;
        // A feasible verdict certifies at most `scale·(1 + residual)`, which
        // must land below the current upper end. The extra factor 10 keeps the
        // infeasibility floor (`10·feas_tol`) within a fraction of `tol`.
        let feas_tol = (0.025 * tol / scale).min(0.5 * (upper - scale) / scale);
        let mut dyk = options.dykstra;
        let mut attempts = 0;
        loop {
            match dykstra::run(a, scale, feas_tol, &dyk)? {
                dykstra::Outcome::Decided(Feasibility::Feasible { witness: w, iterations }) => {
                    dykstra_iterations += iterations;
                    let bound = w.norm_bound().max(lower);
                    if bound < upper {
                        upper = bound;
                        witness = Some(w);
                        factors = None;
                    }
                    break;
                }
                dykstra::Outcome::Decided(Feasibility::Infeasible { iterations, .. }) => {
                    dykstra_iterations += iterations;
                    lower = scale;
                    break;
                }
                dykstra::Outcome::Undecided { witness: w, residual, iterations } => {
                    dykstra_iterations += iterations;
                    // The last iterate still certifies an upper bound; use it
                    // when it makes progress, otherwise widen the budget.
                    let bound = w.norm_bound().max(lower);
                    if bound < upper - 0.25 * tol {
                        upper = bound;
                        witness = Some(w);
                        factors = None;
                        break;
                    }
                    if attempts >= options.widen_attempts {
                        position = shifted_probe(probe, scale, residual, iterations)?;
                        break;
                    }
                    attempts += 1;
                    dyk.max_iter *= 4;
                }
            }
        }
    }

    if let Some(f) = factors {
        witness = Some(dykstra::witness_from_factors(&f.p, &f.q, to_f64(f.max_p), to_f64(f.max_q), upper.max(f.bound())));
    } else if witness.is_none() {
        witness = witness_at(a, upper, tol).ok();
    }
    if let Some(w) = &witness {
        upper = upper.min(w.norm_bound().max(lower));
    }
    let value = 0.5 * (lower + upper);
    let mut cert = certificate(lower, upper, iterations, dykstra_iterations, method, tol, witness);
    cert.value = value;
    Ok(cert)
}

const MAX_BISECTION_STEPS: usize = 200;

// An undecided probe lies close to the norm; the next probe is placed nearer
// the feasible end of the bracket. Gives up once the probe is already there.
fn shifted_probe(probe: f64, scale: f64, residual: f64, iterations: usize) -> Result<f64> {
    if probe >= 0.9 {
        return Err(Error::Indeterminate { scale, residual, iterations });
    }
    Ok(0.5 * (1.0 + probe))
}

fn certificate<T: Scalar>(
    lower: f64,
    upper: f64,
    iterations: usize,
    dykstra_iterations: usize,
    method: NormMethod,
    tol: f64,
    witness: Option<GilbertWitness<T>>,
) -> NormCertificate<T> {
    NormCertificate {
        value: 0.5 * (lower + upper),
        lower_bracket: lower,
        upper_bracket: upper,
        iterations,
        dykstra_iterations,
        method,
        tolerance: tol,
        error_bound: 0.5 * (upper - lower),
        witness,
    }
}

// Witness for bracket-only certificates, where no factorization was built.
fn witness_at<T: Scalar>(a: &DMatrix<T>, scale: f64, tol: f64) -> Result<GilbertWitness<T>> {
    if scale <= 0.0 {
        return Err(Error::param("C", "must be positive"));
    }
    let b = bounds::dual_primal(a, tol, 200);
    match b.factorization {
        Some(f) if f.bound() <= scale * (1.0 + 1e-12) + 1e-15 => {
            Ok(dykstra::witness_from_factors(&f.p, &f.q, to_f64(f.max_p), to_f64(f.max_q), scale))
        }
        _ => match gilbert_feasible(a, scale, 0.25 * tol / scale, &DykstraOptions::default())? {
            Feasibility::Feasible { witness, .. } => Ok(witness),
            Feasibility::Infeasible { residual, iterations } => Err(Error::Infeasible { scale, residual, iterations }),
        },
    }
}

/// Vectors with `⟨p(i), q(j)⟩ = a(i, j)` and `‖p(i)‖, ‖q(j)‖ ≤ √C`, up to
/// the feasibility residual.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationWitness<T: Scalar = f64> {
    /// Rows are `p(i)`.
    pub p: DMatrix<T>,
    /// Rows are `q(j)`.
    pub q: DMatrix<T>,
    pub scale: f64,
}

impl<T: Scalar> FactorizationWitness<T> {
    /// `max |⟨p(i), q(j)⟩ − a(i, j)|`.
    pub fn reconstruction_error(&self, a: &DMatrix<T>) -> f64 {
        to_f64(linalg::max_abs(&(&self.p * self.q.adjoint() - a)))
    }

    pub fn max_norms(&self) -> (f64, f64) {
        (to_f64(linalg::max_of(&linalg::row_norms(&self.p))), to_f64(linalg::max_of(&linalg::row_norms(&self.q))))
    }
}

/// Gram-factorizes a positive completion at scale `C`.
pub fn factorization_witness<T: Scalar>(a: &DMatrix<T>, scale: f64, tol: f64) -> Result<FactorizationWitness<T>> {
    let w = witness_at(a, scale, tol)?;
    let m = a.nrows();
    let mut block = w.assemble(a);
    for i in 0..block.nrows() {
        block[(i, i)] += T::from_real(real(w.residual));
    }
    let g = factor_psd(&block, real(tol))?;
    let root = T::from_real(real(scale.sqrt()));
    let p = g.coords.rows(0, m).into_owned() * root;
    let q = g.coords.rows(m, a.ncols()).into_owned() * root;
    Ok(FactorizationWitness { p, q, scale })
}

/// Schur norm of the principal restriction to `subset`.
pub fn restricted_norm<T: Scalar>(k: &Kernel<T>, subset: &[usize], tol: f64) -> Result<NormCertificate<T>> {
    schur_norm(k.principal(subset)?.matrix(), tol)
}

pub(crate) mod serde_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::Scalar;

    pub fn serialize<S: Serializer, T: Scalar + Serialize>(m: &DMatrix<T>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<T>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Scalar + Deserialize<'de>>(d: D) -> Result<DMatrix<T>, D::Error> {
        let rows: Vec<Vec<T>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_ones() {
        for n in 1..=6 {
            let c = schur_norm(&DMatrix::<f64>::identity(n, n), 1e-6).unwrap();
            assert!((c.value - 1.0).abs() <= 1e-6);
            let c = schur_norm(&DMatrix::<f64>::from_element(n, n, 1.0), 1e-6).unwrap();
            assert!((c.value - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn rotation_is_root_two() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]);
        let c = schur_norm(&a, 1e-6).unwrap();
        assert!((c.value - 2f64.sqrt()).abs() <= 1e-6, "{}", c.value);
        let w = c.witness.unwrap();
        assert!(w.norm_bound() <= c.upper_bracket * (1.0 + 1e-9));
    }

    #[test]
    fn zero_matrix() {
        let c = schur_norm(&DMatrix::<f64>::zeros(3, 3), 1e-6).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(c.witness.is_none());
    }

    #[test]
    fn singleton_restriction() {
        let k = Kernel::from_fn(3, |i, j| (i as f64) - 2.0 * (j as f64)).unwrap();
        let c = restricted_norm(&k, &[2], 1e-6).unwrap();
        assert!((c.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn factorization_of_ones() {
        let a = DMatrix::<f64>::from_element(3, 3, 1.0);
        let f = factorization_witness(&a, 1.0, 1e-9).unwrap();
        assert!(f.reconstruction_error(&a) < 1e-8);
        let (mp, mq) = f.max_norms();
        assert!(mp <= 1.0 + 1e-8 && mq <= 1.0 + 1e-8);
    }

    #[test]
    fn bisection_path_agrees_with_bounds() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, -0.5, 0.2, 0.3, 0.9, -1.1, 0.0, 0.4, 0.7]);
        let opts = SchurOptions { tol: 2e-2, max_ascent_rounds: 1, ..Default::default() };
        let forced = schur_norm_with(&a, &opts).unwrap();
        let fast = schur_norm(&a, 1e-6).unwrap();
        assert_eq!(forced.method, NormMethod::Bisection);
        assert!((forced.value - fast.value).abs() <= 2e-2 + 1e-6, "{} {}", forced.value, fast.value);
    }

    #[test]
    fn certificate_json_round_trip() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]);
        let c = schur_norm(&a, 1e-6).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: NormCertificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back.value, c.value);
    }
}
