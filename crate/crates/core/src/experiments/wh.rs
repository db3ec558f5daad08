//! `φ = Σ αₙ (1 − |φ_{kₙ}|²)` over a finite window of a countable group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function on the window, in enumeration order, with its declared
/// multiplier norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowFunction {
    pub values: Vec<f64>,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub alpha: Vec<f64>,
    pub eps: Vec<f64>,
}

impl Schedule {
    /// `αₙ = n`, `εₙ = n⁻³` for `n = 1, …, terms`.
    pub fn standard(terms: usize) -> Self {
        Schedule {
            alpha: (1..=terms).map(|n| n as f64).collect(),
            eps: (1..=terms).map(|n| (n as f64).powi(-3)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.len() != self.eps.len() {
            return Err(Error::SizeMismatch(self.alpha.len(), self.eps.len()));
        }
        if self.alpha.iter().chain(&self.eps).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::param("schedule", "entries must be positive and finite"));
        }
        if self.alpha.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("alpha", "must be nondecreasing"));
        }
        if self.eps.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::param("eps", "must be nonincreasing"));
        }
        Ok(())
    }
}

/// Size of `{g : φ(g) ≤ level}` on the window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sublevel {
    pub level: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhResult {
    pub phi: Vec<f64>,
    /// Family index chosen for each term.
    pub selected: Vec<usize>,
    /// `max_{i < n} (1 − |φ_{kₙ}(gᵢ)|²)` for each term.
    pub selection_errors: Vec<f64>,
    /// Sublevel sets at the levels `α₁, 2α₁, 4α₁, …` below `max φ`.
    pub sublevels: Vec<Sublevel>,
    /// `min_{i ≥ r} φ(gᵢ)` for every `r`, nondecreasing in `r`.
    pub escape: Vec<f64>,
    /// Every listed sublevel set misses part of the window and `φ` is not
    /// constant on it.
    pub proper_on_window: bool,
}

/// [`wh_combine_with`] over an explicit family.
pub fn wh_combine(window_len: usize, family: &[WindowFunction], schedule: &Schedule) -> Result<WhResult> {
    for (i, f) in family.iter().enumerate() {
        check_member(i, f, window_len)?;
    }
    wh_combine_with(window_len, family.len(), |i| Ok(family[i].clone()), schedule)
}

fn check_member(index: usize, f: &WindowFunction, window_len: usize) -> Result<()> {
    if f.values.len() != window_len {
        return Err(Error::SizeMismatch(window_len, f.values.len()));
    }
    if !(f.norm <= 1.0) {
        return Err(Error::param("family", format!("member {index} declares norm {} > 1", f.norm)));
    }
    if let Some(v) = f.values.iter().find(|v| !(v.abs() <= 1.0 + 1e-12)) {
        return Err(Error::param("family", format!("member {index} takes the value {v}, above its norm")));
    }
    Ok(())
}

/// For term `n` the first family member, from the previously chosen index on,
/// with `1 − |φ_k|² ≤ εₙ` on the first `n` window points is selected, and
/// `αₙ (1 − |φ_k|²)` is added to the output.
pub fn wh_combine_with(
    window_len: usize,
    family_len: usize,
    family: impl Fn(usize) -> Result<WindowFunction>,
    schedule: &Schedule,
) -> Result<WhResult> {
    schedule.validate()?;
    if window_len == 0 {
        return Err(Error::EmptyKernel);
    }
    let mut phi = vec![0.0; window_len];
    let mut selected = Vec::with_capacity(schedule.len());
    let mut selection_errors = Vec::with_capacity(schedule.len());
    let mut from = 0;
    for (term, (&alpha, &eps)) in schedule.alpha.iter().zip(&schedule.eps).enumerate() {
        let n = term + 1;
        let head = n.min(window_len);
        let mut found = None;
        for k in from..family_len {
            let f = family(k)?;
            check_member(k, &f, window_len)?;
            let defect: Vec<f64> = f.values.iter().map(|v| (1.0 - v * v).max(0.0)).collect();
            let err = defect[..head].iter().copied().fold(0.0, f64::max);
            if err <= eps {
                found = Some((k, err, defect));
                break;
            }
        }
        let (k, err, defect) = found.ok_or(Error::Selection { n, eps })?;
        for (p, d) in phi.iter_mut().zip(&defect) {
            *p += alpha * d;
        }
        selected.push(k);
        selection_errors.push(err);
        from = k;
    }

    let max = phi.iter().copied().fold(0.0, f64::max);
    let mut sublevels = Vec::new();
    let mut level = schedule.alpha.first().copied().unwrap_or(1.0);
    while level < max {
        sublevels.push(Sublevel { level, size: phi.iter().filter(|&&v| v <= level).count() });
        level *= 2.0;
    }
    let mut escape = vec![0.0; window_len];
    let mut running = f64::INFINITY;
    for i in (0..window_len).rev() {
        running = running.min(phi[i]);
        escape[i] = running;
    }
    let proper_on_window = max > phi[0] && sublevels.iter().all(|s| s.size < window_len);
    Ok(WhResult { phi, selected, selection_errors, sublevels, escape, proper_on_window })
}

#[cfg(test)]
mod tests {
    use super::*;

    // ℤ enumerated as 0, 1, −1, 2, −2, …
    fn z_window(radius: i64) -> Vec<i64> {
        let mut w = vec![0];
        for k in 1..=radius {
            w.push(k);
            w.push(-k);
        }
        w
    }

    fn triangular(window: &[i64], j: usize) -> WindowFunction {
        let values = window.iter().map(|&k| (1.0 - k.abs() as f64 / j as f64).max(0.0)).collect();
        WindowFunction { values, norm: 1.0 }
    }

    #[test]
    fn triangular_family_is_proper() {
        let window = z_window(100);
        let schedule = Schedule::standard(8);
        let r = wh_combine_with(window.len(), 1_000_000, |j| Ok(triangular(&window, j + 1)), &schedule).unwrap();
        assert!(r.proper_on_window);
        assert!(r.selection_errors.iter().zip(&schedule.eps).all(|(e, eps)| e <= eps));
        for w in r.escape.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for w in r.sublevels.windows(2) {
            assert!(w[0].size <= w[1].size);
        }
        // Symmetric and increasing in |k|.
        for k in 1..100 {
            assert_eq!(r.phi[2 * k - 1], r.phi[2 * k]);
            assert!(r.phi[2 * k + 1] > r.phi[2 * k - 1]);
        }
    }

    #[test]
    fn extending_the_schedule_only_increases() {
        let window = z_window(30);
        let short = wh_combine_with(window.len(), 100_000, |j| Ok(triangular(&window, j + 1)), &Schedule::standard(4)).unwrap();
        let long = wh_combine_with(window.len(), 100_000, |j| Ok(triangular(&window, j + 1)), &Schedule::standard(5)).unwrap();
        assert_eq!(&long.selected[..4], &short.selected[..]);
        assert!(long.phi.iter().zip(&short.phi).all(|(l, s)| l >= s));
    }

    #[test]
    fn exponential_family_tracks_length() {
        let window = z_window(50);
        // e^{-|k|/s} with s growing geometrically in the family index.
        let family = |j: usize| -> Result<WindowFunction> {
            let s = 1.2f64.powi(j as i32);
            Ok(WindowFunction { values: window.iter().map(|&k| (-(k.abs() as f64) / s).exp()).collect(), norm: 1.0 })
        };
        let r = wh_combine_with(window.len(), 400, family, &Schedule::standard(20)).unwrap();
        let ratios: Vec<f64> = (1..window.len()).map(|i| r.phi[i] / window[i].abs() as f64).collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(lo > 0.0 && hi / lo < 10.0, "{lo} {hi}");
        assert!(r.proper_on_window);
    }

    #[test]
    fn preconditions() {
        let bad = vec![WindowFunction { values: vec![1.0, 0.5], norm: 1.5 }];
        assert!(matches!(wh_combine(2, &bad, &Schedule::standard(1)), Err(Error::InvalidParameter { .. })));
        let short = vec![WindowFunction { values: vec![1.0, 0.0], norm: 1.0 }];
        assert_eq!(wh_combine(2, &short, &Schedule::standard(2)), Err(Error::Selection { n: 2, eps: 0.125 }));
    }
}
