//! Desk-scale runs of the structural statements: the linear growth bound for
//! profiles in 𝒮, the proper function built from a contractive family, and the
//! finite-level `R`/`S` splitting.

mod rs;
mod wh;

use serde::{Deserialize, Serialize};

pub use rs::{extract_rs, extract_rs_radial, Completion, RsSplit};
pub use wh::{wh_combine, wh_combine_with, Schedule, Sublevel, WhResult, WindowFunction};

use crate::error::{Error, Result};
use crate::free_group::Group;
use crate::kernel::{lift_radial, HankelKernel, RadialProfile};
use crate::qtransform::{q_s_membership, QParam};
use crate::toeplitz::{s_membership, Membership, MembershipReport, OmegaNormCertificate};

pub const DEFAULT_T_GRID: [f64; 5] = [1.0, 0.3, 0.1, 0.03, 0.01];
pub const DEFAULT_LADDER: [usize; 3] = [100, 200, 400];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub t_grid: Vec<f64>,
    /// Truncations tried in order until a violation is certified.
    pub n_ladder: Vec<usize>,
    /// Fit window `0 ≤ k ≤ K`.
    pub window: usize,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { t_grid: DEFAULT_T_GRID.to_vec(), n_ladder: DEFAULT_LADDER.to_vec(), window: 100, tol: 1e-8 }
    }
}

/// `φ̇(k) ≤ b + a·k` on `0 ≤ k ≤ window`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub a: f64,
    pub b: f64,
    pub window: usize,
}

impl LinearFit {
    /// Slope of the last edge of the upper hull at `k = K`, clamped at zero,
    /// then the smallest `b ≥ 0` making the line dominate the window.
    pub fn fit(profile: &RadialProfile, window: usize) -> Self {
        let values = profile.values(window + 1);
        let last = values[window];
        let a = (0..window)
            .map(|j| (last - values[j]) / (window - j) as f64)
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        let a = if a.is_finite() { a } else { 0.0 };
        let b = values.iter().enumerate().map(|(k, v)| v - a * k as f64).fold(0.0, f64::max);
        LinearFit { a, b, window }
    }

    /// Largest `φ̇(k) − b − a·k` on the window.
    pub fn max_violation(&self, profile: &RadialProfile) -> f64 {
        (0..=self.window).map(|k| profile.value(k) - self.b - self.a * k as f64).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanVerdict {
    /// All norms at most one; the fitted line is in `ScanReport::fit`.
    LinearBound,
    /// A certified norm above one.
    Violation { t: f64, truncation: usize, excess: f64 },
    /// No certified excess, but no upper bound closes at one either.
    NoViolationFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub profile_id: String,
    pub group: Group,
    pub t_values: Vec<f64>,
    /// Truncation of the reported certificates.
    pub truncation: usize,
    /// `(t, certificate)` in grid order.
    pub certificates: Vec<(f64, OmegaNormCertificate)>,
    pub verdict: ScanVerdict,
    pub fit: Option<LinearFit>,
}

fn membership(phi: &HankelKernel<f64>, group: Group, opts: &ScanOptions, n: usize) -> Result<MembershipReport> {
    match group {
        Group::Infinite => s_membership(phi, &opts.t_grid, n, opts.tol),
        Group::Free(g) => q_s_membership(phi, QParam::for_generators(g)?, &opts.t_grid, n, opts.tol),
    }
}

/// Checks `‖e^{−tφ}‖ ≤ 1` over the grid, escalating the truncation along the
/// ladder, and fits a linear bound when every norm is at most one.
pub fn linear_bound_scan(
    profile_id: impl Into<String>,
    profile: &RadialProfile,
    group: Group,
    opts: &ScanOptions,
) -> Result<ScanReport> {
    profile.validate()?;
    if opts.n_ladder.is_empty() || opts.n_ladder.contains(&0) {
        return Err(Error::param("n_ladder", "needs at least one positive truncation"));
    }
    let phi: HankelKernel<f64> = lift_radial(profile);
    let mut last = None;
    for &n in &opts.n_ladder {
        let report = membership(&phi, group, opts, n)?;
        let stop = report.verdict == Membership::NotInS;
        last = Some((n, report));
        if stop {
            break;
        }
    }
    let (truncation, report) = last.expect("ladder is non-empty");
    let (verdict, fit) = match report.verdict {
        Membership::NotInS => (
            ScanVerdict::Violation {
                t: report.witness_t.expect("a violation carries its witness"),
                truncation,
                excess: report.max_excess,
            },
            None,
        ),
        Membership::Consistent => (ScanVerdict::LinearBound, Some(LinearFit::fit(profile, opts.window))),
        Membership::Inconclusive => (ScanVerdict::NoViolationFound, None),
    };
    Ok(ScanReport {
        profile_id: profile_id.into(),
        group,
        t_values: opts.t_grid.clone(),
        truncation,
        certificates: report.evidence,
        verdict,
        fit,
    })
}
