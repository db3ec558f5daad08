//! Functionals on the Toeplitz algebra: `ω_φ` norms, state and generator
//! conditions, the class 𝒮 and the splitting of generators.
//!
//! A kernel `φ` on `ℕ₀ × ℕ₀` defines `ω_φ(S^m S*ⁿ) = φ(m, n)`. Its norm is the
//! trace norm of `h = φ − φ∘σ` plus the `B(ℤ)` norm of the diagonal limit
//! `φ₀`, which for Hankel kernels is the two-atom sum `|c₊| + |c₋|`.

use nalgebra::{ComplexField, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::definiteness::{is_cond_negative_definite, is_positive_definite, DefinitenessReport};
use crate::error::{Error, Result};
use crate::kernel::{section_with_shift, HankelKernel, Kernel, KernelSection, RadialProfile};
use crate::linalg;
use crate::scalar::{real, to_f64, Real, Scalar};

/// Bound on the part of a trace norm lost to truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailBound {
    Known(f64),
    /// No summable decay law is available; the section value is only a
    /// lower bound.
    Unknown,
}

impl TailBound {
    pub fn known(self) -> Option<f64> {
        match self {
            TailBound::Known(v) => Some(v),
            TailBound::Unknown => None,
        }
    }
}

// Serialized as a number, or the string "unknown".
impl Serialize for TailBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TailBound::Known(v) => s.serialize_f64(*v),
            TailBound::Unknown => s.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for TailBound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Number(f64),
            Text(String),
        }
        match Wire::deserialize(d)? {
            Wire::Number(v) => Ok(TailBound::Known(v)),
            Wire::Text(t) if t == "unknown" => Ok(TailBound::Unknown),
            Wire::Text(t) => Err(serde::de::Error::custom(format!("unexpected tail bound `{t}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceNorm {
    pub value: f64,
    pub tail_bound: TailBound,
    pub truncation: usize,
    /// `value` is the norm of the whole operator rather than of a section.
    #[serde(default)]
    pub exact: bool,
}

/// `(c₊, c₋)` with `φ₀(n) = c₊ + c₋(−1)ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalLimit {
    pub c_plus: f64,
    pub c_minus: f64,
}

impl DiagonalLimit {
    /// `‖φ₀‖_{B(ℤ)}`.
    pub fn norm(&self) -> f64 {
        self.c_plus.abs() + self.c_minus.abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaNormCertificate {
    pub hankel_trace_norm: f64,
    pub tail_bound: TailBound,
    /// `None` for explicit finite kernels, whose diagonal limit is not defined.
    pub phi0_constants: Option<DiagonalLimit>,
    pub total: f64,
    pub truncation: usize,
    #[serde(default)]
    pub exact: bool,
}

impl OmegaNormCertificate {
    pub(crate) fn assemble(trace: TraceNorm, phi0: Option<DiagonalLimit>) -> Self {
        OmegaNormCertificate {
            hankel_trace_norm: trace.value,
            tail_bound: trace.tail_bound,
            total: trace.value + phi0.map_or(0.0, |c| c.norm()),
            phi0_constants: phi0,
            truncation: trace.truncation,
            exact: trace.exact,
        }
    }

    /// Interval guaranteed to contain the norm: the section value is a lower
    /// bound, and the tail bound closes it from above.
    pub fn interval(&self) -> (f64, Option<f64>) {
        (self.total, self.tail_bound.known().map(|t| self.total + t))
    }
}

/// `h(m, n) = φ(m, n) − φ(m + 1, n + 1)`.
pub fn hankel_h<R: Real>(phi: &HankelKernel<R>) -> HankelKernel<R> {
    phi.hankel_h()
}

/// `h = φ − φ∘σ` on the largest section where both are known.
pub fn kernel_h<T: Scalar>(phi: &Kernel<T>) -> Result<Kernel<T>> {
    phi.minus_shift()
}

/// Sum of singular values, through the eigenvalues when the input is hermitian.
pub fn section_trace_norm<T: Scalar>(m: &DMatrix<T>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.is_square() && *m == m.adjoint() {
        let (values, _) = linalg::hermitian_eigen(m);
        values.iter().map(|&l| to_f64(l).abs()).sum()
    } else {
        to_f64(linalg::trace_norm(m))
    }
}

/// Trace norm of the leading `n × n` block of `m`; the tail bound is the sum
/// of the Euclidean norms of the discarded rows and columns.
pub fn matrix_trace_norm<T: Scalar>(m: &DMatrix<T>, n: usize) -> TraceNorm {
    let (rows, cols) = m.shape();
    let r = n.min(rows);
    let c = n.min(cols);
    let value = section_trace_norm(&m.view((0, 0), (r, c)).into_owned());
    let discarded_cols: f64 = (c..cols).map(|j| to_f64(m.column(j).norm())).sum();
    let discarded_rows: f64 = (r..rows).map(|i| to_f64(m.view((i, 0), (1, c)).norm())).sum();
    TraceNorm { value, tail_bound: TailBound::Known(discarded_cols + discarded_rows), truncation: n.min(rows.max(cols)), exact: false }
}

/// Trace norm of the `n`-section of the Hankel kernel `h`.
///
/// Writing `H = H_n + (columns ≥ n) + (rows ≥ n, columns < n)` and bounding
/// each rank-one column piece by its Euclidean norm gives
/// `‖H‖₁ − ‖H_n‖₁ ≤ 2 Σ_{j ≥ n} (Σ_{k ≥ j} h(k)²)^{1/2}`, evaluated from the
/// geometric envelope of the tail. Without an envelope the bound is unknown.
///
/// When `h(k) = g(k) + Σ cᵢ rᵢᵏ` with `g` finitely supported and `|rᵢ| < 1`, the
/// operator has finite rank and its trace norm is evaluated exactly instead.
pub fn trace_norm<R: Real>(h: &HankelKernel<R>, n: usize) -> Result<TraceNorm> {
    if n == 0 {
        return Err(Error::EmptyKernel);
    }
    if let Some(value) = finite_rank_trace_norm(h.profile()) {
        return Ok(TraceNorm { value, tail_bound: TailBound::Known(0.0), truncation: n, exact: true });
    }
    let value = section_trace_norm(h.section(n)?.matrix());
    Ok(TraceNorm { value, tail_bound: hankel_tail_bound(h.profile(), n), truncation: n, exact: false })
}

const FINITE_RANK_CAP: usize = 512;

// H = U M Uᵀ with U = [e₀ … e_{p−1}, v₁ … v_r], vᵢ = (rᵢᵏ)_k, so that
// ‖H‖₁ = ‖G^{1/2} M G^{1/2}‖₁ with G = UᵀU.
fn finite_rank_trace_norm(h: &RadialProfile) -> Option<f64> {
    let (g, terms) = h.exponential_terms()?;
    if terms.iter().any(|&(_, r)| !(r.abs() < 1.0)) {
        return None;
    }
    let p = g.len();
    let dim = p + terms.len();
    if dim == 0 {
        return Some(0.0);
    }
    if dim > FINITE_RANK_CAP {
        return None;
    }
    let ratio = |i: usize| terms[i - p].1;
    let gram = DMatrix::from_fn(dim, dim, |a, b| match (a < p, b < p) {
        (true, true) => f64::from(u8::from(a == b)),
        (true, false) => ratio(b).powf(a as f64),
        (false, true) => ratio(a).powf(b as f64),
        (false, false) => 1.0 / (1.0 - ratio(a) * ratio(b)),
    });
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..p {
        for b in 0..p - a {
            m[(a, b)] = g[a + b];
        }
    }
    for (i, &(c, _)) in terms.iter().enumerate() {
        m[(p + i, p + i)] = c;
    }
    let (values, vectors) = linalg::hermitian_eigen(&gram);
    let root = linalg::spectral_map(&values, &vectors, |l| l.max(0.0).sqrt());
    Some(section_trace_norm(&(&root * m * &root)))
}

fn hankel_tail_bound(h: &RadialProfile, n: usize) -> TailBound {
    match ColumnTails::new(h, n) {
        Some(c) => TailBound::Known(2.0 * c.beyond_section),
        None => TailBound::Unknown,
    }
}

/// Euclidean norms `c_j = (Σ_{k ≥ j} h(k)²)^{1/2}` of the columns of an
/// infinite Hankel matrix, from explicit values and a geometric envelope.
pub(crate) struct ColumnTails {
    /// `c_j` for `j < n`.
    pub within: Vec<f64>,
    /// `Σ_{j ≥ n} c_j`.
    pub beyond_section: f64,
}

impl ColumnTails {
    pub fn new(h: &RadialProfile, n: usize) -> Option<Self> {
        if h.limits().constants() != Some((0.0, 0.0)) {
            return None;
        }
        let env = h.remainder_envelope(n)?;
        let (a, rho) = (env.amplitude, env.ratio);
        let start = env.from;
        // Σ_{k ≥ start} h(k)² ≤ a² ρ^{2·start} / (1 − ρ²)
        let beyond = if a == 0.0 {
            0.0
        } else if rho < 1.0 {
            a * a * rho.powf(2.0 * start as f64) / (1.0 - rho * rho)
        } else {
            return None;
        };
        let mut within = vec![0.0; n];
        let mut beyond_section = 0.0;
        let mut explicit = 0.0;
        for j in (0..start).rev() {
            let v = h.value(j);
            explicit += v * v;
            let c = (explicit + beyond).sqrt();
            if j < n {
                within[j] = c;
            } else {
                beyond_section += c;
            }
        }
        // Columns j ≥ start: Σ_j a ρ^j / √(1 − ρ²).
        if a > 0.0 {
            beyond_section += a * rho.powf(start as f64) / ((1.0 - rho) * (1.0 - rho * rho).sqrt());
        }
        Some(ColumnTails { within, beyond_section })
    }
}

/// `(c₊, c₋) = ((L_e + L_o)/2, (L_e − L_o)/2)` from the parity limits of `φ̇`.
pub fn diagonal_limit_phi0<R: Real>(phi: &HankelKernel<R>) -> Result<DiagonalLimit> {
    let (c_plus, c_minus) = phi.profile().constants()?;
    Ok(DiagonalLimit { c_plus, c_minus })
}

/// `‖ω_φ‖ = ‖h‖₁ + |c₊| + |c₋|` on the `n`-section.
pub fn omega_norm<R: Real>(phi: &HankelKernel<R>, n: usize) -> Result<OmegaNormCertificate> {
    let phi0 = diagonal_limit_phi0(phi)?;
    let trace = trace_norm(&phi.hankel_h(), n)?;
    Ok(OmegaNormCertificate::assemble(trace, Some(phi0)))
}

/// Norm contribution of `h = φ − φ∘σ` for an explicit finite kernel.
///
/// There is no diagonal limit and no decay law, so the certificate carries
/// only the section value.
pub fn omega_norm_kernel<T: Scalar>(phi: &Kernel<T>) -> Result<OmegaNormCertificate> {
    let h = kernel_h(phi)?;
    let trace =
        TraceNorm { value: section_trace_norm(h.matrix()), tail_bound: TailBound::Unknown, truncation: h.size(), exact: false };
    Ok(OmegaNormCertificate::assemble(trace, None))
}

/// Positivity of `φ` and `φ − φ∘σ`, with `φ(0, 0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateReport<T = f64> {
    pub positive: DefinitenessReport<T>,
    pub difference_positive: DefinitenessReport<T>,
    pub origin_value: f64,
    pub normalized: bool,
    pub passed: bool,
}

/// Conditional negativity of `ψ`, `ψ(0, 0) = 0` and positivity of `ψ∘σ − ψ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport<T = f64> {
    pub conditionally_negative: DefinitenessReport<T>,
    pub origin_value: f64,
    pub vanishes_at_origin: bool,
    pub shift_difference_positive: DefinitenessReport<T>,
    pub passed: bool,
}

/// Positivity of `θ − ½θ(0, 0)` and of `θ − θ∘σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedPartReport<T = f64> {
    pub half_shifted_positive: DefinitenessReport<T>,
    pub difference_positive: DefinitenessReport<T>,
    pub passed: bool,
}

fn sections<T: Scalar, K: KernelSection<T> + ?Sized>(k: &K, n: usize) -> Result<(Kernel<T>, Kernel<T>)> {
    let (base, shifted) = section_with_shift(k, n)?;
    if !base.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    Ok((base, shifted))
}

fn diff<T: Scalar>(a: &Kernel<T>, b: &Kernel<T>) -> Result<Kernel<T>> {
    a.zip_map(b, |x, y| x - y)
}

fn scaled_tol<T: Scalar>(tol: f64, ks: &[&Kernel<T>]) -> T::RealField {
    let scale = ks.iter().map(|k| to_f64(k.max_abs())).fold(1.0, f64::max);
    real(tol * scale)
}

/// Checks on the `n`-section. The tolerance is relative to `max(1, ‖φ‖∞)`.
pub fn state_conditions<T: Scalar, K: KernelSection<T> + ?Sized>(phi: &K, n: usize, tol: f64) -> Result<StateReport<T>> {
    let (base, shifted) = sections(phi, n)?;
    let d = diff(&base, &shifted)?;
    let eps = scaled_tol(tol, &[&base]);
    let positive = is_positive_definite(&base, eps)?;
    let difference_positive = is_positive_definite(&d, eps)?;
    let origin = base.get(0, 0);
    let origin_value = to_f64(origin.real());
    let normalized = to_f64((origin - T::one()).modulus()) <= to_f64(eps);
    let passed = positive.verdict && difference_positive.verdict && normalized;
    Ok(StateReport { positive, difference_positive, origin_value, normalized, passed })
}

pub fn generator_conditions<T: Scalar, K: KernelSection<T> + ?Sized>(
    psi: &K,
    n: usize,
    tol: f64,
) -> Result<GeneratorReport<T>> {
    let (base, shifted) = sections(psi, n)?;
    let d = diff(&shifted, &base)?;
    let eps = scaled_tol(tol, &[&base]);
    let conditionally_negative = is_cond_negative_definite(&base, eps)?;
    let shift_difference_positive = is_positive_definite(&d, eps)?;
    let origin = base.get(0, 0);
    let vanishes_at_origin = to_f64(origin.modulus()) <= to_f64(eps);
    let passed = conditionally_negative.verdict && shift_difference_positive.verdict && vanishes_at_origin;
    Ok(GeneratorReport {
        conditionally_negative,
        origin_value: to_f64(origin.real()),
        vanishes_at_origin,
        shift_difference_positive,
        passed,
    })
}

pub fn bounded_part_conditions<T: Scalar, K: KernelSection<T> + ?Sized>(
    theta: &K,
    n: usize,
    tol: f64,
) -> Result<BoundedPartReport<T>> {
    let (base, shifted) = sections(theta, n)?;
    let half = base.get(0, 0) * T::from_real(real(0.5));
    let centred = base.map(|v| v - half)?;
    let d = diff(&base, &shifted)?;
    let eps = scaled_tol(tol, &[&base]);
    let half_shifted_positive = is_positive_definite(&centred, eps)?;
    let difference_positive = is_positive_definite(&d, eps)?;
    let passed = half_shifted_positive.verdict && difference_positive.verdict;
    Ok(BoundedPartReport { half_shifted_positive, difference_positive, passed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// Every tested norm is at most one within the tail allowance. This is a
    /// statement about the tested grid and section only.
    Consistent,
    /// Some tested norm certifiably exceeds one.
    NotInS,
    /// Neither of the above could be certified.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub verdict: Membership,
    /// `(t, certificate of ‖ω_{e^{−tφ}}‖)` in grid order.
    pub evidence: Vec<(f64, OmegaNormCertificate)>,
    /// Grid point with the largest certified excess over one.
    pub witness_t: Option<f64>,
    /// Largest `total − allowance − 1` over the grid.
    pub max_excess: f64,
}

pub(crate) fn membership_verdict(evidence: Vec<(f64, OmegaNormCertificate)>, tol: f64) -> MembershipReport {
    let mut consistent = true;
    let mut witness_t = None;
    let mut max_excess = f64::NEG_INFINITY;
    for (t, cert) in &evidence {
        // The section value never exceeds the full norm, so an unknown tail
        // still certifies excess from below.
        let allowance = cert.tail_bound.known().unwrap_or(0.0);
        let excess = cert.total - allowance - 1.0;
        if excess > max_excess {
            max_excess = excess;
            if excess > tol {
                witness_t = Some(*t);
            }
        }
        match cert.tail_bound {
            TailBound::Known(tail) if cert.total <= 1.0 + tail + tol => {}
            _ => consistent = false,
        }
    }
    let verdict = if witness_t.is_some() {
        Membership::NotInS
    } else if consistent {
        Membership::Consistent
    } else {
        Membership::Inconclusive
    };
    MembershipReport { verdict, evidence, witness_t, max_excess }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::param("t_grid", "must not be empty"));
    }
    if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::param("t_grid", "entries must be positive"));
    }
    Ok(())
}

/// Evaluates `‖ω_{e^{−tφ}}‖` over the grid and compares with one.
pub fn s_membership<R: Real>(phi: &HankelKernel<R>, t_grid: &[f64], n: usize, tol: f64) -> Result<MembershipReport> {
    check_grid(t_grid)?;
    let evidence = t_grid
        .par_iter()
        .map(|&t| Ok((t, omega_norm(&phi.exp_scale(t)?, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(membership_verdict(evidence, tol))
}

/// Certificates for the four conditions defining 𝒮.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCertificates<T = f64> {
    pub psi: GeneratorReport<T>,
    pub theta: BoundedPartReport<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitWitness<T: Scalar = f64> {
    /// Conditionally negative part.
    pub psi: Kernel<T>,
    /// Bounded part.
    pub theta: Kernel<T>,
    pub t: f64,
    pub certificates: SplitCertificates<T>,
    /// `max |ψ + θ − (1 − e^{−tφ})/t|` relative to `max(1, ‖·‖∞)`.
    pub reconstruction_error: f64,
}

/// Splits `(1 − e^{−tφ})/t = ψ + θ` on the `n`-section.
///
/// With `f = e^{−tφ}` and `h = f − f∘σ = h⁺ − h⁻` spectrally, the negative
/// functional is `φ⁻(m, n) = Σ_k h⁻(m + k, n + k) + φ₀⁻(m − n)` and the positive
/// one is `φ⁺ = f + φ⁻`. Then `ψ = (c − φ⁺)/t` and `θ = (1 − c + φ⁻)/t` with
/// `c = φ⁺(0, 0)`.
pub fn generator_split<R: Real>(phi: &HankelKernel<R>, t: f64, n: usize, tol: f64) -> Result<SplitWitness<R>> {
    if n == 0 {
        return Err(Error::EmptyKernel);
    }
    let f = phi.exp_scale(t)?;
    let norm = omega_norm(&f, n)?;
    let allowance = norm.tail_bound.known().unwrap_or(0.0);
    if norm.total > 1.0 + allowance + tol {
        return Err(Error::ConditionFailed {
            condition: "membership".into(),
            detail: format!("norm of exp(-{t} phi) is {} > 1", norm.total),
        });
    }
    // One extra index so that every σ-comparison lives on the n-section.
    let size = n + 1;
    let fm = f.section(size)?.into_matrix();
    let h = f.hankel_h().section(size)?.into_matrix();
    let (_, h_neg) = linalg::spectral_parts(&h);
    let phi0 = diagonal_limit_phi0(&f)?;
    let neg_plus = (-phi0.c_plus).max(0.0);
    let neg_minus = (-phi0.c_minus).max(0.0);
    let mut phi_neg = DMatrix::<R>::zeros(size, size);
    for m in 0..size {
        for l in 0..size {
            let mut acc = R::zero();
            for k in 0..size - m.max(l) {
                acc += h_neg[(m + k, l + k)];
            }
            let sign = if (m + l) % 2 == 0 { 1.0 } else { -1.0 };
            phi_neg[(m, l)] = acc + real(neg_plus + sign * neg_minus);
        }
    }
    let phi_pos = &fm + &phi_neg;
    let c = phi_pos[(0, 0)];
    let inv_t: R = real(1.0 / t);
    let one = R::one();
    let psi = phi_pos.map(|v| (c - v) * inv_t);
    let theta = phi_neg.map(|v| (one - c + v) * inv_t);
    let psi = Kernel::new(linalg::hermitian_part(&psi))?;
    let theta = Kernel::new(linalg::hermitian_part(&theta))?;

    let certificates = SplitCertificates {
        psi: generator_conditions(&psi, n, tol)?,
        theta: bounded_part_conditions(&theta, n, tol)?,
    };
    let failing = [
        ("psi conditionally negative", certificates.psi.conditionally_negative.verdict),
        ("psi vanishes at origin", certificates.psi.vanishes_at_origin),
        ("psi shift difference positive", certificates.psi.shift_difference_positive.verdict),
        ("theta minus half origin positive", certificates.theta.half_shifted_positive.verdict),
        ("theta difference positive", certificates.theta.difference_positive.verdict),
    ]
    .into_iter()
    .find(|(_, ok)| !ok);
    if let Some((name, _)) = failing {
        return Err(Error::ConditionFailed { condition: name.into(), detail: format!("at t = {t}, section {n}") });
    }

    let psi = psi.truncate(n)?;
    let theta = theta.truncate(n)?;
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for m in 0..n {
        for l in 0..n {
            let target = (one - fm[(m, l)]) * inv_t;
            scale = scale.max(to_f64(target.abs()));
            worst = worst.max(to_f64((psi.get(m, l) + theta.get(m, l) - target).abs()));
        }
    }
    Ok(SplitWitness { psi, theta, t, certificates, reconstruction_error: worst / scale })
}
