use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use herz_schur::definiteness::{default_tolerance, is_cond_negative_definite, is_positive_definite, schoenberg_check};
use herz_schur::experiments::{
    extract_rs, extract_rs_radial, linear_bound_scan, wh_combine, ScanOptions, ScanVerdict, Schedule, WindowFunction,
};
use herz_schur::free_group::{additivity_check, enumerate_ball, group_matrix, radial_b2_norm, Group, TreePortion, TreeVertex};
use herz_schur::kernel::lift_radial;
use herz_schur::littlewood::{l_norm_upper, littlewood_split, t2_norm, T2_CAP};
use herz_schur::qtransform::{chi_norm, chi_norm_kernel, q_s_membership, QParam};
use herz_schur::schur::{restricted_norm, schur_norm};
use herz_schur::toeplitz::{omega_norm, omega_norm_kernel, s_membership, Membership, MembershipReport, OmegaNormCertificate};
use herz_schur::{Complex64, Error, HankelKernel, Kernel, KernelDocument, RadialProfile, Scalar};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::manifest::read_input;
use crate::Command;

pub struct Report {
    pub body: Value,
    pub csv: Option<String>,
    /// The command ran but its mathematical verdict is negative.
    pub negative: bool,
}

impl Report {
    fn ok(body: impl Serialize) -> CliResult<Self> {
        Ok(Report { body: to_value(body), csv: None, negative: false })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Positive definite.
    Pd,
    /// Conditionally negative definite.
    Cnd,
    /// Conditionally negative definite, with `e^{−tk}` checked on a grid.
    Schoenberg,
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn load<T: DeserializeOwned>(path: &Path, digests: &mut BTreeMap<String, String>) -> CliResult<T> {
    let bytes = read_input(path, digests)?;
    serde_json::from_slice(&bytes).map_err(|source| CliError::Json { path: path.to_owned(), source })
}

fn load_profile(path: &Path, digests: &mut BTreeMap<String, String>) -> CliResult<RadialProfile> {
    let p: RadialProfile = load(path, digests)?;
    p.validate()?;
    Ok(p)
}

enum AnyKernel {
    Real(Kernel<f64>),
    Complex(Kernel<Complex64>),
}

fn load_kernel(path: &Path, digests: &mut BTreeMap<String, String>) -> CliResult<AnyKernel> {
    let doc: KernelDocument = load(path, digests)?;
    Ok(if doc.real { AnyKernel::Real(doc.to_real()?) } else { AnyKernel::Complex(doc.to_complex()?) })
}

fn load_real_kernel(path: &Path, digests: &mut BTreeMap<String, String>) -> CliResult<Kernel<f64>> {
    let doc: KernelDocument = load(path, digests)?;
    Ok(doc.to_real()?)
}

fn group(s: &str) -> CliResult<Group> {
    Ok(s.parse::<Group>()?)
}

fn free_generators(s: &str) -> CliResult<usize> {
    group(s)?
        .generators()
        .ok_or_else(|| CliError::Core(Error::InvalidParameter { name: "group", reason: "needs a finitely generated group (fN)".into() }))
}

fn num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn membership_csv(evidence: &[(f64, OmegaNormCertificate)]) -> String {
    let mut csv = String::from("t,total,hankel_trace_norm,tail_bound,truncation,exact\n");
    for (t, c) in evidence {
        let tail = c.tail_bound.known().map_or(String::new(), num);
        let _ = writeln!(csv, "{},{},{},{tail},{},{}", num(*t), num(c.total), num(c.hankel_trace_norm), c.truncation, c.exact);
    }
    csv
}

fn membership(report: MembershipReport) -> CliResult<Report> {
    let csv = Some(membership_csv(&report.evidence));
    let negative = report.verdict == Membership::NotInS;
    Ok(Report { body: to_value(report), csv, negative })
}

fn definiteness<T: Scalar + Serialize>(k: &Kernel<T>, kind: Kind, tol: Option<f64>, t_grid: &[f64]) -> CliResult<Report>
where
    T::RealField: Serialize,
{
    let tol = match tol {
        Some(t) => herz_schur::scalar::real(t),
        None => default_tolerance(k),
    };
    let (body, verdict) = match kind {
        Kind::Pd => {
            let r = is_positive_definite(k, tol)?;
            let v = r.verdict;
            (to_value(r), v)
        }
        Kind::Cnd => {
            let r = is_cond_negative_definite(k, tol)?;
            let v = r.verdict;
            (to_value(r), v)
        }
        Kind::Schoenberg => {
            let grid: Vec<T::RealField> = t_grid.iter().map(|&t| herz_schur::scalar::real(t)).collect();
            let r = schoenberg_check(k, &grid, tol)?;
            let v = r.cnd.verdict;
            (to_value(r), v)
        }
    };
    Ok(Report { body: json!({ "kind": kind, "report": body }), csv: None, negative: !verdict })
}

fn negative(body: Value) -> CliResult<Report> {
    Ok(Report { body, csv: None, negative: true })
}

#[derive(Deserialize)]
struct WhInput {
    family: Vec<WindowFunction>,
    #[serde(default)]
    schedule: Option<Schedule>,
}

pub fn execute(command: &Command, digests: &mut BTreeMap<String, String>) -> CliResult<Report> {
    match command {
        Command::SchurNorm { input, tol, subset } => {
            let k = load_kernel(input, digests)?;
            match (k, subset) {
                (AnyKernel::Real(k), Some(s)) => Report::ok(restricted_norm(&k, s, *tol)?),
                (AnyKernel::Real(k), None) => Report::ok(schur_norm(k.matrix(), *tol)?),
                (AnyKernel::Complex(k), Some(s)) => Report::ok(restricted_norm(&k, s, *tol)?),
                (AnyKernel::Complex(k), None) => Report::ok(schur_norm(k.matrix(), *tol)?),
            }
        }
        Command::OmegaNorm { profile, input, n } => match (profile, input) {
            (Some(p), _) => {
                let phi: HankelKernel = lift_radial(&load_profile(p, digests)?);
                Report::ok(omega_norm(&phi, *n)?)
            }
            (None, Some(i)) => match load_kernel(i, digests)? {
                AnyKernel::Real(k) => Report::ok(omega_norm_kernel(&k)?),
                AnyKernel::Complex(k) => Report::ok(omega_norm_kernel(&k)?),
            },
            (None, None) => Err(CliError::Usage("omega-norm needs --profile or --input".into())),
        },
        Command::ChiNorm { profile, input, q, n } => {
            let q = QParam::new(*q)?;
            match (profile, input) {
                (Some(p), _) => {
                    let phi: HankelKernel = lift_radial(&load_profile(p, digests)?);
                    Report::ok(chi_norm(&phi, q, *n)?)
                }
                (None, Some(i)) => match load_kernel(i, digests)? {
                    AnyKernel::Real(k) => Report::ok(chi_norm_kernel(&k, q)?),
                    AnyKernel::Complex(k) => Report::ok(chi_norm_kernel(&k, q)?),
                },
                (None, None) => Err(CliError::Usage("chi-norm needs --profile or --input".into())),
            }
        }
        Command::SCheck { profile, grid, n, tol } => {
            let phi: HankelKernel = lift_radial(&load_profile(&profile.profile, digests)?);
            membership(s_membership(&phi, &grid.t_grid, *n, *tol)?)
        }
        Command::QSCheck { profile, grid, q, n, tol } => {
            let phi: HankelKernel = lift_radial(&load_profile(&profile.profile, digests)?);
            membership(q_s_membership(&phi, QParam::new(*q)?, &grid.t_grid, *n, *tol)?)
        }
        Command::RadialNorm { profile, group: g, n } => {
            let p = load_profile(&profile.profile, digests)?;
            Report::ok(radial_b2_norm(&p, group(g)?, *n)?)
        }
        Command::BallSchur { profile, group: g, radius, tol } => {
            let p = load_profile(&profile.profile, digests)?;
            let generators = free_generators(g)?;
            let ball = enumerate_ball(generators, *radius)?;
            let k: Kernel = group_matrix(&p, &ball)?;
            let mut cert = schur_norm(k.matrix(), *tol)?;
            cert.witness = None;
            Report::ok(json!({ "group": group(g)?, "radius": radius, "ball_size": ball.len(), "certificate": cert }))
        }
        Command::TreeCheck { q, radius } => {
            let tree = TreePortion::ball(*q, *radius)?;
            let violations = additivity_check(&tree)?;
            let n = tree.len();
            let mut asymmetric = 0usize;
            for x in 0..n {
                for y in x..n {
                    let (m, k) = tree.mn_pair(TreeVertex(x), TreeVertex(y))?;
                    if tree.mn_pair(TreeVertex(y), TreeVertex(x))? != (k, m) {
                        asymmetric += 1;
                    }
                }
            }
            let body = json!({
                "q": q,
                "radius": radius,
                "vertices": n,
                "triples_checked": n * n * n,
                "additivity_violations": violations,
                "asymmetric_pairs": asymmetric,
                "passed": violations == 0 && asymmetric == 0,
            });
            Ok(Report { body, csv: None, negative: violations > 0 || asymmetric > 0 })
        }
        Command::Littlewood { input } => {
            let k = load_real_kernel(input, digests)?;
            let a = k.matrix();
            let split = littlewood_split(a)?;
            let t2 = if a.nrows() <= T2_CAP { Some(t2_norm(a)?) } else { None };
            Report::ok(json!({
                "t2_norm": t2,
                "l_norm_upper": l_norm_upper(&split),
                "reconstruction_error": split.reconstruction_error(a),
                "split": split,
            }))
        }
        Command::LinearBoundScan { profile, grid, group: g, n_ladder, window, tol } => {
            let p = load_profile(&profile.profile, digests)?;
            let opts = ScanOptions { t_grid: grid.t_grid.clone(), n_ladder: n_ladder.clone(), window: *window, tol: *tol };
            let id = profile.profile.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let report = linear_bound_scan(id, &p, group(g)?, &opts)?;
            let csv = Some(membership_csv(&report.certificates));
            let negative = matches!(report.verdict, ScanVerdict::Violation { .. });
            Ok(Report { body: to_value(report), csv, negative })
        }
        Command::ExtractRs { profile, input, group: g, radius, level, tol } => {
            let result = match (profile, input) {
                (Some(p), _) => {
                    let p = load_profile(p, digests)?;
                    extract_rs_radial(&p, free_generators(g)?, *radius, *level, *tol)
                }
                (None, Some(i)) => extract_rs(&load_real_kernel(i, digests)?, *level, *tol),
                (None, None) => return Err(CliError::Usage("extract-rs needs --profile or --input".into())),
            };
            match result {
                Ok(split) => Report::ok(split),
                Err(Error::ConditionFailed { condition, detail }) => {
                    negative(json!({ "verdict": "negative", "condition": condition, "detail": detail }))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::WhCombine { input, n } => {
            let doc: WhInput = load(input, digests)?;
            let window_len = doc.family.first().map_or(0, |f| f.values.len());
            let schedule = doc.schedule.unwrap_or_else(|| Schedule::standard(*n));
            match wh_combine(window_len, &doc.family, &schedule) {
                Ok(r) => Report::ok(r),
                Err(Error::Selection { n, eps }) => {
                    negative(json!({ "verdict": "negative", "condition": "selection", "term": n, "eps": eps }))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Definiteness { input, kind, tol, t_grid } => match load_kernel(input, digests)? {
            AnyKernel::Real(k) => definiteness(&k, *kind, *tol, t_grid),
            AnyKernel::Complex(k) => definiteness(&k, *kind, *tol, t_grid),
        },
    }
}
