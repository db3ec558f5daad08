//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use herz_schur::free_group::{additivity_check, enumerate_ball, group_matrix, radial_b2_norm, Group, TreePortion, TreeVertex};
use herz_schur::kernel::lift_radial;
use herz_schur::littlewood::{l_norm_upper, littlewood_split, t2_norm};
use herz_schur::qtransform::{chi_norm_kernel, f_apply, f_inv, fg_identity_residual, g_apply, g_inv, QParam};
use herz_schur::schur::schur_norm;
use herz_schur::toeplitz::{generator_conditions, generator_split, omega_norm_kernel, s_membership};
use herz_schur::experiments::DEFAULT_T_GRID;
use herz_schur::{Complex64, HankelKernel, Kernel, RadialProfile};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn exponential_infinite() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for t in [0.1, 0.5, 1.0, 2.0] {
        let c = radial_b2_norm(&RadialProfile::exponential(t), Group::Infinite, 200).map_err(|e| e.to_string())?;
        worst = worst.max((c.total - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-8 && secs < 5.0, format!("max |norm − 1| = {worst:.2e}, {secs:.2}s"))
}

fn exponential_f2() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for t in [0.1, 0.5, 1.0, 2.0] {
        let c = radial_b2_norm(&RadialProfile::exponential(t), Group::Free(2), 300).map_err(|e| e.to_string())?;
        worst = worst.max((c.total - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6 && secs < 30.0, format!("max |norm − 1| = {worst:.2e}, {secs:.2}s"))
}

fn square_profile_excess() -> Outcome {
    let start = Instant::now();
    let phi: HankelKernel = lift_radial(&RadialProfile::power(1.0, 2.0));
    let mut best = (f64::NEG_INFINITY, 0.0, 0);
    for n in [100, 200, 400] {
        let report = s_membership(&phi, &DEFAULT_T_GRID, n, 1e-8).map_err(|e| e.to_string())?;
        for (t, c) in &report.evidence {
            // Section values are lower bounds for the full norm.
            if c.total > best.0 {
                best = (c.total, *t, n);
            }
        }
        if best.0 >= 1.0 + 1e-3 {
            break;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let (total, t, n) = best;
    check(total >= 1.0 + 1e-3 && secs < 120.0, format!("norm {total:.6} at t = {t}, N = {n}, {secs:.2}s"))
}

fn random_hermitian(r: &mut ChaCha8Rng, n: usize) -> Kernel<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    Kernel::new((&a + a.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

fn translation_identity() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for q in [3, 5] {
        let q = QParam::new(q).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let phi = random_hermitian(&mut r, 20);
            let chi = chi_norm_kernel(&phi, q).map_err(|e| e.to_string())?.total;
            let omega = omega_norm_kernel(&g_apply(&phi, q).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.total;
            worst = worst.max((chi - omega).abs() / chi.abs().max(omega.abs()).max(f64::MIN_POSITIVE));
        }
    }
    check(worst <= 1e-9, format!("max relative gap {worst:.2e}"))
}

fn fg_calculus() -> Outcome {
    let mut r = rng(5);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for q in [3, 5, 9] {
        let q = QParam::new(q).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let a = DMatrix::from_fn(30, 30, |_, _| r.gen_range(-1.0..1.0));
            let k: Kernel = Kernel::new(a).unwrap();
            let scale = k.max_abs().max(1.0);
            let err = |x: &Kernel, y: &Kernel| (x.matrix() - y.matrix()).amax() / scale;
            let f = f_inv(&f_apply(&k, q).unwrap(), q).unwrap();
            let g = g_inv(&g_apply(&k, q).unwrap(), q).unwrap();
            let fg = fg_identity_residual(&k, q).unwrap() / scale;
            worst = (worst.0.max(err(&f, &k)), worst.1.max(err(&g, &k)), worst.2.max(fg));
        }
    }
    let (f, g, fg) = worst;
    check(f <= 1e-12 && g <= 1e-12 && fg <= 1e-12, format!("F⁻¹F {f:.1e}, G⁻¹G {g:.1e}, FG residual {fg:.1e}"))
}

// Minimises max‖P_i‖·max‖Q_j‖ over real 2×2 factorisations a = P Qᵀ. Rows of P
// are parametrised by angle and length (the larger fixed at 1) and Q = P⁻¹a.
fn factorization_search(a: &DMatrix<f64>) -> f64 {
    let cost = |theta0: f64, theta1: f64, rho: f64, swap: bool| -> f64 {
        let (r0, r1) = if swap { (rho, 1.0) } else { (1.0, rho) };
        let p = DMatrix::from_row_slice(2, 2, &[r0 * theta0.cos(), r0 * theta0.sin(), r1 * theta1.cos(), r1 * theta1.sin()]);
        match p.clone().try_inverse() {
            Some(inv) => {
                let qt = inv * a;
                let max_q = (0..2).map(|j| qt.column(j).norm()).fold(0.0, f64::max);
                r0.max(r1) * max_q
            }
            None => f64::INFINITY,
        }
    };
    let mut best = (f64::INFINITY, 0.0, 0.0, 1.0, false);
    let steps = 120;
    for i in 0..steps {
        for j in 0..steps {
            for k in 1..=20 {
                for swap in [false, true] {
                    let (t0, t1, rho) = (2.0 * PI * i as f64 / steps as f64, 2.0 * PI * j as f64 / steps as f64, k as f64 / 20.0);
                    let c = cost(t0, t1, rho, swap);
                    if c < best.0 {
                        best = (c, t0, t1, rho, swap);
                    }
                }
            }
        }
    }
    // Pattern search from the best grid point.
    let (mut value, mut t0, mut t1, mut rho, swap) = best;
    let mut step = 2.0 * PI / steps as f64;
    while step > 1e-12 {
        let mut improved = false;
        for (d0, d1, dr) in [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0, -1.0)] {
            let cand = (t0 + d0 * step, t1 + d1 * step, (rho + dr * step).clamp(1e-6, 1.0));
            let c = cost(cand.0, cand.1, cand.2, swap);
            if c < value {
                (value, t0, t1, rho) = (c, cand.0, cand.1, cand.2);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    value
}

fn schur_oracles() -> Outcome {
    let tol = 1e-5;
    let mut worst_trivial = 0.0f64;
    for n in 1..=10 {
        for a in [DMatrix::<f64>::identity(n, n), DMatrix::from_element(n, n, 1.0)] {
            let c = schur_norm(&a, tol).map_err(|e| e.to_string())?;
            worst_trivial = worst_trivial.max((c.value - 1.0).abs());
        }
    }
    let rot = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]);
    let oracle = factorization_search(&rot);
    let rot_value = schur_norm(&rot, tol).map_err(|e| e.to_string())?.value;
    let rot_gap = (rot_value - oracle).abs();

    let mut r = rng(6);
    let mut worst_gram = 0.0f64;
    for _ in 0..50 {
        let n = r.gen_range(2..=12);
        let dim = r.gen_range(1..=n);
        let mut v = DMatrix::from_fn(n, dim, |_, _| r.gen_range(-1.0..1.0));
        for mut row in v.row_iter_mut() {
            let norm = row.norm();
            row /= norm;
        }
        let gram = &v * v.transpose();
        let c = schur_norm(&gram, 1e-4).map_err(|e| e.to_string())?;
        worst_gram = worst_gram.max((c.value - 1.0).abs());
    }
    check(
        worst_trivial <= 1e-4 && rot_gap <= 1e-4 && worst_gram <= 2e-4,
        format!("identity/ones {worst_trivial:.1e}, rotation {rot_value:.6} vs oracle {oracle:.6}, Gram {worst_gram:.1e}"),
    )
}

fn ball_sandwich() -> Outcome {
    let start = Instant::now();
    let profile = RadialProfile::finite(vec![1.0, 0.5, 0.25]);
    let radial = radial_b2_norm(&profile, Group::Free(2), 300).map_err(|e| e.to_string())?;
    let mut norms = Vec::new();
    for radius in [1, 2] {
        let ball = enumerate_ball(2, radius).map_err(|e| e.to_string())?;
        let k: Kernel = group_matrix(&profile, &ball).map_err(|e| e.to_string())?;
        norms.push((ball.len(), schur_norm(k.matrix(), 1e-6).map_err(|e| e.to_string())?.value));
    }
    let secs = start.elapsed().as_secs_f64();
    let (size, r2) = norms[1];
    check(
        size == 17 && r2 <= radial.total + 1e-4 && norms[0].1 <= r2 + 1e-6 && secs < 60.0,
        format!("radius 1 {:.6}, radius 2 {r2:.6}, radial {:.6}, {secs:.2}s", norms[0].1, radial.total),
    )
}

fn tree_geometry() -> Outcome {
    let tree = TreePortion::ball(3, 3).map_err(|e| e.to_string())?;
    let violations = additivity_check(&tree).map_err(|e| e.to_string())?;
    let n = tree.len();
    let mut asymmetric = 0;
    for x in 0..n {
        for y in 0..n {
            let (m, k) = tree.mn_pair(TreeVertex(x), TreeVertex(y)).map_err(|e| e.to_string())?;
            if tree.mn_pair(TreeVertex(y), TreeVertex(x)).map_err(|e| e.to_string())? != (k, m) {
                asymmetric += 1;
            }
        }
    }
    check(
        n == 53 && violations == 0 && asymmetric == 0,
        format!("{n} vertices, {violations} additivity violations, {asymmetric} asymmetric pairs"),
    )
}

fn littlewood_suite() -> Outcome {
    let mut cases: Vec<DMatrix<f64>> = Vec::new();
    for n in 1..=3usize {
        for mask in 0u32..(1 << (n * n)) {
            cases.push(DMatrix::from_fn(n, n, |i, j| if mask >> (i * n + j) & 1 == 1 { 1.0 } else { -1.0 }));
        }
    }
    let mut r = rng(9);
    for _ in 0..200 {
        cases.push(DMatrix::from_fn(4, 4, |_, _| if r.gen_bool(0.5) { 1.0 } else { -1.0 }));
    }
    for n in 1..=6 {
        cases.push(DMatrix::identity(n, n));
        cases.push(DMatrix::from_element(n, n, 1.0));
    }
    let mut failures = 0;
    for a in &cases {
        let split = littlewood_split(a).map_err(|e| e.to_string())?;
        let t2 = t2_norm(a).map_err(|e| e.to_string())?;
        let l = l_norm_upper(&split);
        let ok = split.reconstruction_error(a) == 0.0
            && split.supports_disjoint
            && t2 <= 2.0 * l + 1e-12
            && 2.0 * l <= 2.0 * t2 + 1e-12;
        if !ok {
            failures += 1;
        }
    }
    check(failures == 0, format!("{} matrices, {failures} failures", cases.len()))
}

fn membership_discrimination() -> Outcome {
    let linear: HankelKernel = lift_radial(&RadialProfile::linear());
    let report = s_membership(&linear, &DEFAULT_T_GRID, 200, 1e-8).map_err(|e| e.to_string())?;
    let max_total = report.evidence.iter().map(|(_, c)| c.total).fold(f64::NEG_INFINITY, f64::max);

    let square: HankelKernel = lift_radial(&RadialProfile::power(1.0, 2.0));
    let gen = generator_conditions(&square, 2, 1e-9).map_err(|e| e.to_string())?;
    let witness_len = gen.shift_difference_positive.witness_vector.as_ref().map_or(0, Vec::len);

    let split = generator_split(&linear, 0.01, 30, 1e-9).map_err(|e| e.to_string())?;
    let certified = split.certificates.psi.passed && split.certificates.theta.passed;
    check(
        max_total <= 1.0 + 1e-8 && !gen.passed && witness_len == 2 && split.reconstruction_error <= 1e-10 && certified,
        format!(
            "linear max total {max_total:.12}, square witness size {witness_len}, split error {:.1e}, certified {certified}",
            split.reconstruction_error
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("exponential radial norm on F_inf", exponential_infinite),
        ("exponential radial norm on F_2", exponential_f2),
        ("square profile certified above one", square_profile_excess),
        ("chi/omega translation identity", translation_identity),
        ("F/G inverses and FG residual", fg_calculus),
        ("Schur norm oracle agreement", schur_oracles),
        ("ball sandwich on F_2", ball_sandwich),
        ("tree additivity and mn symmetry", tree_geometry),
        ("Littlewood split suite", littlewood_suite),
        ("membership discrimination", membership_discrimination),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
