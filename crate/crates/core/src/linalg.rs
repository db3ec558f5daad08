//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{ComplexField, DMatrix, RealField};
use num_traits::Zero;

use crate::scalar::{real, to_f64, Real, Scalar};

/// Hermitian part `(m + m*) / 2`.
pub fn hermitian_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_real(real(0.5));
    (m + m.adjoint()) * half
}

/// Spectral decomposition of a hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so that round-off asymmetry never leaks
/// into the eigensolver.
pub fn hermitian_eigen<T: Scalar>(m: &DMatrix<T>) -> (Vec<T::RealField>, DMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let base = hermitian_part(m);
    let scale = max_abs(&base);
    let eps = <T::RealField as approx::AbsDiffEq>::default_epsilon();
    // The QR sweeps can return NaN on subnormal entries, so entries far below
    // the scale are flushed; a second attempt flushes at relative precision.
    let mut eig = flushed(&base, scale * eps * eps * eps * eps).symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        eig = flushed(&base, scale * eps).symmetric_eigen();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        to_f64(eig.eigenvalues[a]).total_cmp(&to_f64(eig.eigenvalues[b]))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn flushed<T: Scalar>(m: &DMatrix<T>, below: T::RealField) -> DMatrix<T> {
    m.map(|v| if v.modulus() < below { T::zero() } else { v })
}

/// Rebuilds `V diag(f(λ)) V*` from an eigendecomposition.
pub fn spectral_map<T: Scalar>(
    values: &[T::RealField],
    vectors: &DMatrix<T>,
    f: impl Fn(T::RealField) -> T::RealField,
) -> DMatrix<T> {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (c, &lambda) in values.iter().enumerate() {
        let w = T::from_real(f(lambda));
        for r in 0..n {
            scaled[(r, c)] *= w;
        }
    }
    scaled * vectors.adjoint()
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn psd_projection<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let (values, vectors) = hermitian_eigen(m);
    let zero = T::RealField::zero();
    let mut out = spectral_map(&values, &vectors, |l| if l > zero { l } else { zero });
    symmetrize_in_place(&mut out);
    out
}

/// Splits a hermitian matrix into `(positive, negative)` spectral parts with
/// `m = positive - negative`, both positive semidefinite.
pub fn spectral_parts<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let (values, vectors) = hermitian_eigen(m);
    let zero = T::RealField::zero();
    let mut pos = spectral_map(&values, &vectors, |l| if l > zero { l } else { zero });
    let mut neg = spectral_map(&values, &vectors, |l| if l < zero { -l } else { zero });
    symmetrize_in_place(&mut pos);
    symmetrize_in_place(&mut neg);
    (pos, neg)
}

pub(crate) fn symmetrize_in_place<T: Scalar>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let half = T::from_real(real(0.5));
    for i in 0..n {
        m[(i, i)] = T::from_real(m[(i, i)].real());
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conjugate()) * half;
            m[(i, j)] = v;
            m[(j, i)] = v.conjugate();
        }
    }
}

/// Singular value decomposition `m = U diag(σ) V*` with `σ` descending.
///
/// The singular values come from the hermitian eigenproblem of
/// `[[0, m], [m*, 0]]`, whose eigenvalues are `±σ_k`. `nalgebra`'s bidiagonal
/// SVD can return wrong singular values on rank-deficient input, while the
/// eigenvectors of the augmented matrix mix `±σ` pairs when `σ` is tiny. The
/// bidiagonal vectors are kept when they reproduce `m` and the singular values
/// agree; otherwise the augmented eigenvectors are used.
pub struct Svd<T: Scalar> {
    pub sigma: Vec<T::RealField>,
    /// `rows × r` with orthonormal columns, `r = min(rows, cols)`.
    pub u: DMatrix<T>,
    /// `cols × r` with orthonormal columns.
    pub v: DMatrix<T>,
}

pub fn svd<T: Scalar>(m: &DMatrix<T>) -> Svd<T> {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Svd { sigma: Vec::new(), u: DMatrix::zeros(rows, 0), v: DMatrix::zeros(cols, 0) };
    }
    let augmented = augmented_svd(m);
    bidiagonal_svd(m, &augmented.sigma).unwrap_or(augmented)
}

fn bidiagonal_svd<T: Scalar>(m: &DMatrix<T>, sigma: &[T::RealField]) -> Option<Svd<T>> {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    let d = m.clone().try_svd(true, true, <T::RealField as approx::AbsDiffEq>::default_epsilon(), 0)?;
    let (u0, v0) = (d.u?, d.v_t?.adjoint());
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| d.singular_values[j].partial_cmp(&d.singular_values[i]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = DMatrix::zeros(rows, r);
    let mut v = DMatrix::zeros(cols, r);
    for (k, &i) in order.iter().enumerate() {
        u.set_column(k, &u0.column(i));
        v.set_column(k, &v0.column(i));
    }
    let scale = to_f64(max_abs(m)).max(f64::MIN_POSITIVE);
    let slack = 1e-12 * (rows + cols) as f64;
    let values_agree = order.iter().zip(sigma).all(|(&i, &s)| to_f64((d.singular_values[i] - s).abs()) <= slack * scale);
    let mut rebuilt = u.clone();
    for k in 0..r {
        rebuilt.column_mut(k).scale_mut(sigma[k]);
    }
    let reproduces = to_f64(max_abs(&(rebuilt * v.adjoint() - m))) <= slack * scale;
    let identity = DMatrix::<T>::identity(r, r);
    let orthonormal = to_f64(max_abs(&(u.adjoint() * &u - &identity))) <= slack
        && to_f64(max_abs(&(v.adjoint() * &v - &identity))) <= slack;
    (values_agree && reproduces && orthonormal).then(|| Svd { sigma: sigma.to_vec(), u, v })
}

fn augmented_svd<T: Scalar>(m: &DMatrix<T>) -> Svd<T> {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    let mut aug = DMatrix::zeros(rows + cols, rows + cols);
    aug.view_mut((0, rows), (rows, cols)).copy_from(m);
    aug.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    let (values, vectors) = hermitian_eigen(&aug);
    let total = rows + cols;
    let root2 = T::from_real(real::<T::RealField>(2.0).sqrt());
    let zero = T::RealField::zero();
    let mut sigma = Vec::with_capacity(r);
    let mut u = DMatrix::zeros(rows, r);
    let mut v = DMatrix::zeros(cols, r);
    for k in 0..r {
        let idx = total - 1 - k;
        let s = values[idx];
        sigma.push(if s > zero { s } else { zero });
        for i in 0..rows {
            u[(i, k)] = vectors[(i, idx)] * root2;
        }
        for j in 0..cols {
            v[(j, k)] = vectors[(rows + j, idx)] * root2;
        }
    }
    Svd { sigma, u, v }
}

/// Singular values, descending.
pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Vec<T::RealField> {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Vec::new();
    }
    let mut aug = DMatrix::zeros(rows + cols, rows + cols);
    aug.view_mut((0, rows), (rows, cols)).copy_from(m);
    aug.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    let (mut sorted, _) = hermitian_eigen(&aug);
    sorted.reverse();
    let zero = T::RealField::zero();
    sorted.into_iter().take(r).map(|s| if s > zero { s } else { zero }).collect()
}

/// Trace (nuclear) norm: the sum of singular values.
pub fn trace_norm<T: Scalar>(m: &DMatrix<T>) -> T::RealField {
    singular_values(m).iter().fold(T::RealField::zero(), |acc, &s| acc + s)
}

/// Operator (spectral) norm.
pub fn operator_norm<T: Scalar>(m: &DMatrix<T>) -> T::RealField {
    singular_values(m).first().copied().unwrap_or_else(T::RealField::zero)
}

pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T::RealField {
    m.iter().fold(T::RealField::zero(), |acc, v| RealField::max(acc, v.modulus()))
}

pub fn row_norms<T: Scalar>(m: &DMatrix<T>) -> Vec<T::RealField> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().fold(T::RealField::zero(), |a, v| a + v.modulus_squared()).sqrt())
        .collect()
}

pub fn col_norms<T: Scalar>(m: &DMatrix<T>) -> Vec<T::RealField> {
    (0..m.ncols())
        .map(|j| m.column(j).iter().fold(T::RealField::zero(), |a, v| a + v.modulus_squared()).sqrt())
        .collect()
}

pub(crate) fn max_of<R: Real>(values: &[R]) -> R {
    values.iter().fold(R::zero(), |a, &b| a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_are_sorted() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0]);
        let (values, vectors) = hermitian_eigen(&m);
        assert_eq!(values, vec![-1.0, 2.0, 5.0]);
        let back = spectral_map(&values, &vectors, |l| l);
        assert!((back - m).amax() < 1e-12);
    }

    #[test]
    fn spectral_parts_reassemble() {
        let m = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let (p, n) = spectral_parts(&m);
        assert!((&p - &n - &m).amax() < 1e-12);
        assert!((p.trace() - 3.0).abs() < 1e-12);
        assert!((n.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_of_rank_one() {
        let v = nalgebra::DVector::<f64>::from_vec(vec![3.0, 4.0]);
        let m = &v * v.transpose();
        assert!((trace_norm(&m) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_singular_values() {
        for n in 2..9 {
            let m = DMatrix::<f64>::from_element(n, n, 1.0 / n as f64);
            assert!((trace_norm(&m) - 1.0).abs() < 1e-13, "n={n}");
            let d = svd(&m);
            assert!((d.sigma[0] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0]);
        let d = svd(&m);
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.sigma.clone()));
        let back = &d.u * s * d.v.adjoint();
        assert!((back - &m).amax() < 1e-12);
        assert!((d.u.adjoint() * &d.u - DMatrix::identity(2, 2)).amax() < 1e-12);
    }
}
