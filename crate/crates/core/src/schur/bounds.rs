//! Two-sided bounds for the Schur multiplier norm.
//!
//! For unit vectors `x, y` the rank-one trace-class test matrix `x y*` gives
//! `‖a‖_S ≥ ‖D_x a D_y‖₁`, and the supremum over `x, y` is attained. An SVD
//! `D_x a D_y = U Σ V*` also factors `a(i, j) = ⟨P_i, Q_j⟩` with
//! `P_i = U_i Σ^{1/2} / x_i`, `Q_j = V_j Σ^{1/2} / y_j`, so that
//! `‖a‖_S ≤ max‖P_i‖ · max‖Q_j‖`. At the optimal weights the two bounds meet.
//! The weights are improved by alternating ascent on the lower bound.

use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_traits::{One, Zero};

use crate::linalg;
use crate::scalar::{real, to_f64, Real, Scalar};

pub(crate) struct Factorization<T: Scalar> {
    /// Rows are `P_i`.
    pub p: DMatrix<T>,
    /// Rows are `Q_j`, with `a(i, j) = Σ_k P_ik conj(Q_jk)`.
    pub q: DMatrix<T>,
    pub max_p: T::RealField,
    pub max_q: T::RealField,
}

impl<T: Scalar> Factorization<T> {
    pub fn bound(&self) -> f64 {
        to_f64(self.max_p * self.max_q)
    }
}

pub(crate) struct Bounds<T: Scalar> {
    pub lower: f64,
    pub upper: f64,
    pub rounds: usize,
    pub factorization: Option<Factorization<T>>,
}

fn weighted<T: Scalar>(a: &DMatrix<T>, x: &DVector<T::RealField>, y: &DVector<T::RealField>) -> DMatrix<T> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * T::from_real(x[i] * y[j]))
}

fn normalized<R: Real>(v: DVector<R>) -> Option<DVector<R>> {
    let n = v.norm();
    (n > R::zero() && n.is_finite()).then(|| v / n)
}

fn uniform<R: Real>(n: usize) -> DVector<R> {
    let v: R = R::one() / real::<R>(n as f64).sqrt();
    DVector::from_element(n, v)
}

struct Step<T: Scalar> {
    value: T::RealField,
    u: DMatrix<T>,
    v_t: DMatrix<T>,
    sigma: Vec<T::RealField>,
}

fn svd_step<T: Scalar>(a: &DMatrix<T>, x: &DVector<T::RealField>, y: &DVector<T::RealField>) -> Option<Step<T>> {
    let d = linalg::svd(&weighted(a, x, y));
    let value = d.sigma.iter().fold(T::RealField::zero(), |acc, &s| acc + s);
    if !value.is_finite() {
        return None;
    }
    Some(Step { value, u: d.u, v_t: d.v.adjoint(), sigma: d.sigma })
}

fn factorization<T: Scalar>(
    a: &DMatrix<T>,
    x: &DVector<T::RealField>,
    y: &DVector<T::RealField>,
    step: &Step<T>,
) -> Option<Factorization<T>> {
    let zero = T::RealField::zero();
    let r = step.sigma.len();
    let root: Vec<T::RealField> = step.sigma.iter().map(|s| s.max(zero).sqrt()).collect();
    let side = |weights: &DVector<T::RealField>, basis: &DMatrix<T>, rows: usize, is_row: bool| {
        let mut out = DMatrix::zeros(rows, r);
        for i in 0..rows {
            let w = weights[i];
            if w == zero {
                // Zero weight only arises for vanishing lines of `a`.
                let empty = if is_row { a.row(i).iter().all(|v| v.is_zero()) } else { a.column(i).iter().all(|v| v.is_zero()) };
                if !empty {
                    return None;
                }
                continue;
            }
            for k in 0..r {
                out[(i, k)] = basis[(i, k)] * T::from_real(root[k] / w);
            }
        }
        Some(out)
    };
    let p = side(x, &step.u, a.nrows(), true)?;
    let v = step.v_t.adjoint();
    let q = side(y, &v, a.ncols(), false)?;
    let max_p = p.row_iter().fold(zero, |acc, row| RealField::max(acc, row.norm()));
    let max_q = q.row_iter().fold(zero, |acc, row| RealField::max(acc, row.norm()));
    (max_p * max_q).is_finite().then_some(Factorization { p, q, max_p, max_q })
}

/// Absorbs `e = a − P Q*` into extra coordinates, `P' = [P, s·e]` and
/// `Q' = [Q, I/s]`, so that the bound stays exact.
fn repaired<T: Scalar>(a: &DMatrix<T>, f: Factorization<T>) -> Option<Factorization<T>> {
    let e = a - &f.p * f.q.adjoint();
    let scale = to_f64(linalg::max_abs(a)).max(f64::MIN_POSITIVE);
    let err = e.row_iter().map(|r| to_f64(r.norm())).fold(0.0, f64::max);
    if err <= 64.0 * f64::EPSILON * scale {
        return Some(f);
    }
    let (m, r) = f.p.shape();
    let n = f.q.nrows();
    let s = (to_f64(f.max_q) / (to_f64(f.max_p) * err)).sqrt();
    if !(s.is_finite() && s > 0.0) {
        return None;
    }
    let mut p = DMatrix::zeros(m, r + n);
    p.columns_mut(0, r).copy_from(&f.p);
    p.columns_mut(r, n).copy_from(&(e * T::from_real(real(s))));
    let mut q = DMatrix::zeros(n, r + n);
    q.columns_mut(0, r).copy_from(&f.q);
    for j in 0..n {
        q[(j, r + j)] = T::from_real(real(1.0 / s));
    }
    let zero = T::RealField::zero();
    let max_p = p.row_iter().fold(zero, |acc, row| RealField::max(acc, row.norm()));
    let max_q = q.row_iter().fold(zero, |acc, row| RealField::max(acc, row.norm()));
    (max_p * max_q).is_finite().then_some(Factorization { p, q, max_p, max_q })
}

fn floored<R: Real>(v: &DVector<R>, eps: f64) -> Option<DVector<R>> {
    let floor = v.amax() * real::<R>(eps);
    normalized(v.map(|w| RealField::max(w, floor)))
}

fn degenerate<R: Real>(v: &DVector<R>) -> bool {
    v.min() < v.amax() * real::<R>(1e-3)
}

// When the optimal weights vanish on some lines the plain factorization blows
// up there. Raising them to a small floor keeps every line bounded at a cost
// quadratic in the floor.
fn floored_factorization<T: Scalar>(
    a: &DMatrix<T>,
    x: &DVector<T::RealField>,
    y: &DVector<T::RealField>,
) -> Option<Factorization<T>> {
    let mut best: Option<Factorization<T>> = None;
    for eps in [1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
        let (Some(xe), Some(ye)) = (floored(x, eps), floored(y, eps)) else { continue };
        let Some(step) = svd_step(a, &xe, &ye) else { continue };
        let Some(f) = factorization(a, &xe, &ye, &step).and_then(|f| repaired(a, f)) else { continue };
        if best.as_ref().map_or(true, |b| f.bound() < b.bound()) {
            best = Some(f);
        }
    }
    best
}

fn max_row_norm<T: Scalar>(m: &DMatrix<T>) -> T::RealField {
    m.row_iter().fold(T::RealField::zero(), |acc, row| RealField::max(acc, row.norm()))
}

fn pseudo_inverse<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let d = linalg::svd(m);
    let top = d.sigma.iter().fold(0.0f64, |acc, &s| acc.max(to_f64(s)));
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in d.sigma.iter().enumerate() {
        if to_f64(s) > 1e-13 * top {
            out += d.v.column(k) * d.u.column(k).adjoint() * T::from_real(T::RealField::one() / s);
        }
    }
    out
}

fn select<T: Scalar>(a: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Appends the SVD of `e = a − P Q*` as extra coordinates, balanced by the
/// scale that minimizes the product of the largest row norms.
fn absorbed<T: Scalar>(a: &DMatrix<T>, p: DMatrix<T>, q: DMatrix<T>) -> Option<Factorization<T>> {
    let e = a - &p * q.adjoint();
    let d = linalg::svd(&e);
    let top = d.sigma.iter().fold(0.0f64, |acc, &s| acc.max(to_f64(s)));
    let kept: Vec<usize> = (0..d.sigma.len()).filter(|&k| to_f64(d.sigma[k]) > 1e-15 * top.max(f64::MIN_POSITIVE)).collect();
    let (m, r) = p.shape();
    let n = q.nrows();
    let extra = kept.len();
    let mut pe = DMatrix::zeros(m, extra);
    let mut qe = DMatrix::zeros(n, extra);
    for (c, &k) in kept.iter().enumerate() {
        let root = T::from_real(d.sigma[k].sqrt());
        pe.set_column(c, &(d.u.column(k) * root));
        qe.set_column(c, &(d.v.column(k) * root));
    }
    let sq = |m: &DMatrix<T>| -> Vec<f64> { m.row_iter().map(|r| to_f64(r.norm_squared())).collect() };
    let (p2, q2, pe2, qe2) = (sq(&p), sq(&q), sq(&pe), sq(&qe));
    let cost = |s: f64| {
        let mp = p2.iter().zip(&pe2).map(|(a, b)| a + s * s * b).fold(0.0, f64::max);
        let mq = q2.iter().zip(&qe2).map(|(a, b)| a + b / (s * s)).fold(0.0, f64::max);
        mp * mq
    };
    let mut scale = 1.0;
    if extra > 0 {
        let mut best = f64::INFINITY;
        for k in 0..=640 {
            let s = (-16.0 + k as f64 * 0.05).exp();
            let c = cost(s);
            if c < best {
                best = c;
                scale = s;
            }
        }
    }
    let mut pf = DMatrix::zeros(m, r + extra);
    pf.columns_mut(0, r).copy_from(&p);
    pf.columns_mut(r, extra).copy_from(&(pe * T::from_real(real(scale))));
    let mut qf = DMatrix::zeros(n, r + extra);
    qf.columns_mut(0, r).copy_from(&q);
    qf.columns_mut(r, extra).copy_from(&(qe * T::from_real(real(1.0 / scale))));
    let (max_p, max_q) = (max_row_norm(&pf), max_row_norm(&qf));
    (max_p * max_q).is_finite().then_some(Factorization { p: pf, q: qf, max_p, max_q })
}

// The least-norm extension leaves a residual on the inactive block. It is
// factored within the slack those lines have below the active row norms,
// which is a smaller Schur norm problem of the same kind.
fn completed<T: Scalar>(
    a: &DMatrix<T>,
    p: DMatrix<T>,
    q: DMatrix<T>,
    on_i: &[usize],
    off_i: &[usize],
    on_j: &[usize],
    off_j: &[usize],
) -> (DMatrix<T>, DMatrix<T>) {
    if off_i.is_empty() || off_j.is_empty() {
        return (p, q);
    }
    let top = |m: &DMatrix<T>, lines: &[usize]| lines.iter().map(|&i| to_f64(m.row(i).norm_squared())).fold(0.0, f64::max);
    let (tp, tq) = (top(&p, on_i), top(&q, on_j));
    let slack = |m: &DMatrix<T>, lines: &[usize], t: f64| -> Vec<f64> { lines.iter().map(|&i| t - to_f64(m.row(i).norm_squared())).collect() };
    let (sp, sq) = (slack(&p, off_i, tp), slack(&q, off_j, tq));
    if sp.iter().chain(&sq).any(|&v| !(v > 0.0)) {
        return (p, q);
    }
    let residual = select(a, off_i, off_j) - select(&p, off_i, &(0..p.ncols()).collect::<Vec<_>>()) * select(&q, off_j, &(0..q.ncols()).collect::<Vec<_>>()).adjoint();
    let scaled = DMatrix::from_fn(off_i.len(), off_j.len(), |i, j| residual[(i, j)] * T::from_real(real(1.0 / (sp[i] * sq[j]).sqrt())));
    if to_f64(linalg::max_abs(&scaled)) == 0.0 {
        return (p, q);
    }
    let Some(inner) = dual_primal(&scaled, 1e-3, 2000).factorization else { return (p, q) };
    let balance = (to_f64(inner.max_q) / to_f64(inner.max_p)).sqrt();
    if !(balance.is_finite() && balance > 0.0) {
        return (p, q);
    }
    let (r, extra) = (p.ncols(), inner.p.ncols());
    let mut pf = DMatrix::zeros(p.nrows(), r + extra);
    pf.columns_mut(0, r).copy_from(&p);
    for (i, &row) in off_i.iter().enumerate() {
        for k in 0..extra {
            pf[(row, r + k)] = inner.p[(i, k)] * T::from_real(real(sp[i].sqrt() * balance));
        }
    }
    let mut qf = DMatrix::zeros(q.nrows(), r + extra);
    qf.columns_mut(0, r).copy_from(&q);
    for (j, &col) in off_j.iter().enumerate() {
        for k in 0..extra {
            qf[(col, r + k)] = inner.q[(j, k)] * T::from_real(real(sq[j].sqrt() / balance));
        }
    }
    (pf, qf)
}

// Lines whose optimal weight vanishes are left out of the SVD. They get the
// least-norm coefficients against the active block, and whatever that misses
// is absorbed afterwards.
fn active_factorization<T: Scalar>(
    a: &DMatrix<T>,
    x: &DVector<T::RealField>,
    y: &DVector<T::RealField>,
) -> Option<Factorization<T>> {
    let (m, n) = a.shape();
    let mut best: Option<Factorization<T>> = None;
    for delta in [1e-2, 1e-3, 1e-4, 1e-6] {
        let split = |v: &DVector<T::RealField>| -> (Vec<usize>, Vec<usize>) {
            let floor = to_f64(v.amax()) * delta;
            (0..v.len()).partition(|&i| to_f64(v[i]) > floor)
        };
        let ((on_i, off_i), (on_j, off_j)) = (split(x), split(y));
        if on_i.is_empty() || on_j.is_empty() {
            continue;
        }
        let xi = DVector::from_fn(on_i.len(), |i, _| x[on_i[i]]);
        let yj = DVector::from_fn(on_j.len(), |j, _| y[on_j[j]]);
        let block = select(a, &on_i, &on_j);
        let d = linalg::svd(&weighted(&block, &xi, &yj));
        let top = d.sigma.iter().fold(0.0f64, |acc, &s| acc.max(to_f64(s)));
        let kept: Vec<usize> = (0..d.sigma.len()).filter(|&k| to_f64(d.sigma[k]) > 1e-14 * top).collect();
        let r = kept.len();
        let mut p = DMatrix::zeros(m, r);
        let mut q = DMatrix::zeros(n, r);
        for (c, &k) in kept.iter().enumerate() {
            let root = d.sigma[k].sqrt();
            for (i, &row) in on_i.iter().enumerate() {
                p[(row, c)] = d.u[(i, k)] * T::from_real(root / xi[i]);
            }
            for (j, &col) in on_j.iter().enumerate() {
                q[(col, c)] = d.v[(j, k)] * T::from_real(root / yj[j]);
            }
        }
        if r > 0 {
            let p_on = select(&p, &on_i, &(0..r).collect::<Vec<_>>());
            let q_on = select(&q, &on_j, &(0..r).collect::<Vec<_>>());
            if !off_i.is_empty() {
                let rows = select(a, &off_i, &on_j) * pseudo_inverse(&q_on.adjoint());
                for (i, &row) in off_i.iter().enumerate() {
                    p.set_row(row, &rows.row(i));
                }
            }
            if !off_j.is_empty() {
                let cols = (pseudo_inverse(&p_on) * select(a, &on_i, &off_j)).adjoint();
                for (j, &col) in off_j.iter().enumerate() {
                    q.set_row(col, &cols.row(j));
                }
            }
        }
        let (p, q) = completed(a, p, q, &on_i, &off_i, &on_j, &off_j);
        let Some(f) = absorbed(a, p, q) else { continue };
        if best.as_ref().map_or(true, |b| f.bound() < b.bound()) {
            best = Some(f);
        }
    }
    best
}

/// Runs the ascent until the gap is at most `gap` or `max_rounds` is hit.
pub(crate) fn dual_primal<T: Scalar>(a: &DMatrix<T>, gap: f64, max_rounds: usize) -> Bounds<T> {
    let (m, n) = a.shape();
    let mut x: DVector<T::RealField> = uniform(m);
    let mut y: DVector<T::RealField> = uniform(n);
    let mut lower = 0.0f64;
    let mut upper = f64::INFINITY;
    let mut best: Option<Factorization<T>> = None;
    let mut rounds = 0;
    let mut stale = 0;
    while rounds < max_rounds {
        rounds += 1;
        let Some(step) = svd_step(a, &x, &y) else { break };
        let before = (lower, upper);
        lower = lower.max(to_f64(step.value));
        if let Some(f) = factorization(a, &x, &y, &step).and_then(|f| repaired(a, f)) {
            if f.bound() < upper {
                upper = f.bound();
                best = Some(f);
            }
        }
        if rounds % 25 == 0 && upper - lower > gap && (degenerate(&x) || degenerate(&y)) {
            for f in [floored_factorization(a, &x, &y), active_factorization(a, &x, &y)].into_iter().flatten() {
                if f.bound() < upper {
                    upper = f.bound();
                    best = Some(f);
                }
            }
        }
        if upper - lower <= gap {
            break;
        }
        let w = &step.u * &step.v_t;
        // Rows and columns alternate so that each update is a true ascent step.
        if rounds % 2 == 1 {
            let ay = DMatrix::from_fn(m, n, |i, j| a[(i, j)] * T::from_real(y[j]));
            let c = DVector::from_fn(m, |i, _| (0..n).fold(T::zero(), |acc, j| acc + ay[(i, j)] * w[(i, j)].conjugate()).real().abs());
            match normalized(c) {
                Some(v) => x = v,
                None => break,
            }
        } else {
            let xa = DMatrix::from_fn(m, n, |i, j| a[(i, j)] * T::from_real(x[i]));
            let d = DVector::from_fn(n, |j, _| (0..m).fold(T::zero(), |acc, i| acc + xa[(i, j)] * w[(i, j)].conjugate()).real().abs());
            match normalized(d) {
                Some(v) => y = v,
                None => break,
            }
        }
        let moved = (lower - before.0) > 1e-15 * lower.max(1.0) || (before.1 - upper) > 1e-15 * lower.max(1.0);
        stale = if moved { 0 } else { stale + 1 };
        if stale >= 40 {
            break;
        }
    }
    if upper - lower > gap && (degenerate(&x) || degenerate(&y)) {
        if let Some(f) = active_factorization(a, &x, &y) {
            if f.bound() < upper {
                upper = f.bound();
                best = Some(f);
            }
        }
    }
    Bounds { lower, upper, rounds, factorization: best }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_and_identity_close_immediately() {
        for a in [DMatrix::<f64>::from_element(4, 4, 1.0), DMatrix::identity(5, 5)] {
            let b = dual_primal(&a, 1e-10, 100);
            assert!((b.lower - 1.0).abs() < 1e-12, "{}", b.lower);
            assert!((b.upper - 1.0).abs() < 1e-10, "{}", b.upper);
        }
    }

    #[test]
    fn factorization_reproduces_entries() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, -0.5, 0.2, 0.3, 0.9, -1.1, 0.0, 0.4, 0.7]);
        let b = dual_primal(&a, 1e-9, 5000);
        let f = b.factorization.unwrap();
        let back = &f.p * f.q.adjoint();
        assert!((back - &a).amax() < 1e-12);
        assert!(b.lower <= b.upper + 1e-12);
        assert!(b.upper - b.lower < 1e-6, "{} {}", b.lower, b.upper);
    }

    #[test]
    fn zero_row_is_handled() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let b = dual_primal(&a, 1e-12, 100);
        assert!((b.lower - 1.0).abs() < 1e-12);
        assert!((b.upper - 1.0).abs() < 1e-9);
    }
}
