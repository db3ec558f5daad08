//! Littlewood kernels: the `t₂` norm and the inductive splitting `a = b + c`
//! with uniformly bounded columns of `b` and rows of `c`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Scalar};
use crate::schur::serde_rows;

/// Largest dimension accepted by the exhaustive [`t2_norm`].
pub const T2_CAP: usize = 8;

/// `sup { (1/|F₁|) Σ_{i∈F₁, j∈F₂} |a_ij|² : |F₁| = |F₂| }^{1/2}`, computed exactly.
///
/// For a fixed row set and size `k` the best column set is formed by the `k`
/// largest column sums over those rows, so only row subsets are enumerated.
pub fn t2_norm<T: Scalar>(a: &DMatrix<T>) -> Result<f64> {
    t2_norm_with_cap(a, T2_CAP)
}

pub fn t2_norm_with_cap<T: Scalar>(a: &DMatrix<T>, cap: usize) -> Result<f64> {
    let (m, n) = a.shape();
    let size = m.max(n);
    if size > cap || m >= usize::BITS as usize {
        return Err(Error::CapExceeded { what: "t2 brute force (use littlewood_split bounds)", size, cap });
    }
    let sq = DMatrix::from_fn(m, n, |i, j| to_f64(a[(i, j)].modulus_squared()));
    let best = (1u64..(1u64 << m))
        .into_par_iter()
        .map(|mask| {
            let rows: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let k = rows.len();
            if k > n {
                return 0.0;
            }
            let mut sums: Vec<f64> = (0..n).map(|j| rows.iter().map(|&i| sq[(i, j)]).sum()).collect();
            sums.sort_by(|x, y| y.total_cmp(x));
            sums[..k].iter().sum::<f64>() / k as f64
        })
        .reduce(|| 0.0, f64::max);
    Ok(best.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct LittlewoodSplit<T: Scalar = f64> {
    #[serde(with = "serde_rows")]
    pub b: DMatrix<T>,
    #[serde(with = "serde_rows")]
    pub c: DMatrix<T>,
    pub supports_disjoint: bool,
    /// `sup_j (Σ_i |b_ij|²)^{1/2}`, the `ℓ¹ → ℓ²` norm of `b`.
    pub col_bound: f64,
    /// `sup_i (Σ_j |c_ij|²)^{1/2}`, the `ℓ² → ℓ∞` norm of `c`.
    pub row_bound: f64,
}

impl<T: Scalar> LittlewoodSplit<T> {
    /// `max |b + c − a|`.
    pub fn reconstruction_error(&self, a: &DMatrix<T>) -> f64 {
        (&self.b + &self.c - a).iter().map(|x| to_f64(x.modulus())).fold(0.0, f64::max)
    }
}

/// Repeatedly removes the row with the smallest square sum and the column with
/// the smallest square sum (lowest index on ties) from the remaining matrix.
/// Each removed row is assigned to `c` and each removed column to `b`, the
/// shared corner going to `b`.
pub fn littlewood_split<T: Scalar>(a: &DMatrix<T>) -> Result<LittlewoodSplit<T>> {
    let (m, n) = a.shape();
    if m != n {
        return Err(Error::NotSquare { rows: m, cols: n });
    }
    let sq = DMatrix::from_fn(n, n, |i, j| to_f64(a[(i, j)].modulus_squared()));
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut b = DMatrix::zeros(n, n);
    let mut c = DMatrix::zeros(n, n);
    while !rows.is_empty() {
        let row_sum = |i: usize| cols.iter().map(|&j| sq[(i, j)]).sum::<f64>();
        let col_sum = |j: usize| rows.iter().map(|&i| sq[(i, j)]).sum::<f64>();
        let ri = argmin(&rows, row_sum);
        let cj = argmin(&cols, col_sum);
        let (i, j) = (rows[ri], cols[cj]);
        for &jj in &cols {
            if jj != j {
                c[(i, jj)] = a[(i, jj)];
            }
        }
        for &ii in &rows {
            b[(ii, j)] = a[(ii, j)];
        }
        rows.remove(ri);
        cols.remove(cj);
    }
    let supports_disjoint = b.iter().zip(c.iter()).all(|(x, y)| x.is_zero() || y.is_zero());
    let col_bound = (0..n).map(|j| to_f64(b.column(j).norm())).fold(0.0, f64::max);
    let row_bound = (0..n).map(|i| to_f64(c.row(i).norm())).fold(0.0, f64::max);
    Ok(LittlewoodSplit { b, c, supports_disjoint, col_bound, row_bound })
}

// Position of the smallest value, first one on ties.
fn argmin(indices: &[usize], value: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (pos, &idx) in indices.iter().enumerate() {
        let v = value(idx);
        if v < best_value {
            best = pos;
            best_value = v;
        }
    }
    best
}

/// `max(‖b‖_{ℓ¹→ℓ²}, ‖c‖_{ℓ²→ℓ∞})`, an upper bound on `‖a‖_L`.
pub fn l_norm_upper<T: Scalar>(split: &LittlewoodSplit<T>) -> f64 {
    split.col_bound.max(split.row_bound)
}
