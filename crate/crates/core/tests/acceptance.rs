//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcurv::degree::expansion::family_quadratic;
use qcurv::degree::{
    alignment_check, brouwer_degree, calibrate, euler_sum, expansion_error, morse_analysis, DegreeOpts, MorseOpts,
};
use qcurv::functionals::{aubin_probe, energy, kw_residual, lq_power};
use qcurv::geometry::{pullback_t, BallParam, Dimension, SpherePoint};
use qcurv::pipeline::commands::reconstruct;
use qcurv::pipeline::{cmd_solve, run_check, run_solve, BackendKind, Preset, RunConfig};
use qcurv::reduction::{estimate_checks, multiplier_field, solve_reduced, ReduceOpts, ReducedSolution};
use qcurv::spectral::{axisym_backend, axisym_nodes_for, full_backend, Backend, Field};
use qcurv::{FSpec, Result, Term};

type Outcome = Result<(bool, String)>;

fn axis_param(m: usize, s: f64) -> BallParam {
    let mut v = vec![0.0; m];
    v[m - 1] = s;
    BallParam::new(v).expect("inside the ball")
}

fn axisym(n: usize, l: usize) -> Result<Arc<dyn Backend>> {
    let dim = Dimension::new(n)?;
    axisym_backend(&dim, axisym_nodes_for(&dim, l), l, n)
}

/// Unnormalized Gegenbauer `C_k^alpha(s)`.
fn gegenbauer(k: i64, alpha: f64, s: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (1.0, 2.0 * alpha * s);
    if k == 0 {
        return prev;
    }
    for j in 2..=k {
        let jf = j as f64;
        let next = (2.0 * s * (jf + alpha - 1.0) * cur - (jf + 2.0 * alpha - 2.0) * prev) / jf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `d^j/ds^j C_k^alpha = 2^j (alpha)_j C_{k-j}^{alpha+j}`.
fn gegenbauer_derivative(k: i64, alpha: f64, j: i64, s: f64) -> f64 {
    let rising: f64 = (0..j).map(|i| 2.0 * (alpha + i as f64)).product();
    rising * gegenbauer(k - j, alpha + j as f64, s)
}

/// `P_h g` for a zonal `g(s)` from its first four derivatives, with
/// `Delta g = -(1 - s^2) g'' + n s g'`.
fn zonal_paneitz(n: f64, c_n: f64, d_n: f64, s: f64, g: [f64; 5]) -> f64 {
    let w = 1.0 - s * s;
    let lap = -w * g[2] + n * s * g[1];
    let lap1 = 2.0 * s * g[2] - w * g[3] + n * g[1] + n * s * g[2];
    let lap2 = (2.0 + 2.0 * n) * g[2] + (4.0 + n) * s * g[3] - w * g[4];
    let bilap = -w * lap2 + n * s * lap1;
    bilap + c_n * lap + d_n * g[0]
}

/// `P_h` applied to every basis function against the symbol, plus a zonal ODE
/// oracle with exact Gegenbauer derivatives on the axisymmetric basis.
fn spectral_symbol() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_ode: f64 = 0.0;
    let mut checked = 0;
    for n in [5, 6, 8] {
        let dim = Dimension::new(n)?;
        let alpha = (n as f64 - 1.0) / 2.0;
        let mut backends = vec![axisym(n, 16)?];
        if n == 5 {
            backends.push(full_backend(&dim, 4, 1.0)?);
        }
        for b in backends {
            let pole = SpherePoint::pole(n + 1, n);
            let at_pole = b.eval_basis(pole.coords());
            for (i, &k) in b.degrees().iter().enumerate() {
                let mut c = vec![0.0; b.n_modes()];
                c[i] = 1.0;
                let e = Field::from_coeffs(&b, c);
                let nl = dim.lambda(k);
                let sym = nl * nl + dim.c_n * nl + dim.d_n;
                let pe = e.paneitz(1.0);
                let dev = pe.values().iter().zip(e.values()).map(|(p, v)| (p - sym * v).abs()).fold(0.0, f64::max);
                worst = worst.max(dev);
                checked += 1;
                if b.symmetry_axis().is_some() {
                    let norm_k = at_pole[i] / gegenbauer(k as i64, alpha, 1.0);
                    let scale = sym * e.sup_norm();
                    for node in 0..b.n_nodes() {
                        let s = b.node(node)[n];
                        let g = [0, 1, 2, 3, 4].map(|j| norm_k * gegenbauer_derivative(k as i64, alpha, j, s));
                        let v = e.values()[node];
                        let rel = (zonal_paneitz(n as f64, dim.c_n, dim.d_n, s, g) - sym * v).abs() / scale;
                        worst_ode = worst_ode.max(rel).max((g[0] - v).abs() / e.sup_norm());
                    }
                }
            }
        }
    }
    Ok((
        worst < 1e-9 && worst_ode < 1e-9,
        format!("{checked} basis functions, max sup deviation {worst:.2e}, zonal ODE oracle relative {worst_ode:.2e}"),
    ))
}

fn constants() -> Outcome {
    let d5 = Dimension::new(5)?;
    let mut ok = d5.c_n == 5.5 && d5.d_n == 6.5625 && d5.f0 == 13.125;
    let mut worst: f64 = 0.0;
    for n in [5, 6, 8] {
        let d = Dimension::new(n)?;
        ok &= d.d_n == (n as f64 - 4.0) * d.f0 / 2.0;
        worst = worst.max((d.k0_inv_scaled - d.d_n).abs() / d.d_n);
    }
    ok &= worst < 1e-9;
    Ok((ok, format!("c5 {} d5 {} f0(5) {}, max rel |K0^-1 w^-4/n - d_n| {worst:.2e}", d5.c_n, d5.d_n, d5.f0)))
}

fn conformal_invariance() -> Outcome {
    let n = 6;
    let dim = Dimension::new(n)?;
    let b = axisym_backend(&dim, 64, 40, n)?;
    let q = dim.two_sharp;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let coeffs: Vec<f64> = b
            .degrees()
            .iter()
            .map(|&k| match k {
                0 => 1.0,
                k if k <= 6 => 0.3 * rng.random_range(-1.0..1.0) / (1.0 + k as f64).powi(2),
                _ => 0.0,
            })
            .collect();
        let u = Field::from_coeffs(&b, coeffs);
        let t = rng.random_range(1.0..4.0);
        let north = SpherePoint::pole(n + 1, n);
        let center = if rng.random_bool(0.5) { north } else { north.antipode() };
        let p = BallParam::from_center(&center, t)?;
        let tu = Field::from_fn(&b, pullback_t(&p, |x: &[f64]| u.eval(x)));
        let e0 = energy(&u).total(1.0);
        let e1 = energy(&tu).total(1.0);
        let m0 = lq_power(&u, q);
        let m1 = lq_power(&tu, q);
        worst = worst.max(((e1 - e0) / e0).abs()).max(((m1 - m0) / m0).abs());
    }
    Ok((worst < 1e-5, format!("50 samples, t <= 4, max relative drift {worst:.2e}")))
}

fn constant_solve() -> Outcome {
    let dim = Dimension::new(6)?;
    let c = 1.7 * dim.f0;
    let mut cfg = RunConfig::default();
    cfg.f.preset = Preset::Constant;
    cfg.f.value = Some(c);
    let run = run_solve(&cfg)?;
    let cert = &run.certificate;
    let target = dim.constant_solution(c);
    let field = run.field.as_ref().expect("certified field");
    let dev = field.values().iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
    let ok = cert.pass && cert.residual_sup < 1e-10 && cert.lambda_norm < 1e-12 && dev < 1e-10;
    Ok((ok, format!("|u - {target:.6}| {dev:.2e}, residual {:.2e}, |Lambda| {:.1e}", cert.residual_sup, cert.lambda_norm)))
}

const LAW_GRID: [f64; 5] = [-0.5, 0.25, 0.5, 0.75, 0.875];

/// Solves for the reduction-law and multiplier criteria, per `eps`.
fn law_solves() -> Result<Vec<(f64, FSpec, Vec<ReducedSolution>)>> {
    let n = 6;
    let dim = Dimension::new(n)?;
    let b = axisym(n, 40)?;
    let mut out = Vec::new();
    for eps in [0.04, 0.02, 0.01] {
        let f = FSpec::axisym_quadratic(&dim, eps, n);
        let sols = LAW_GRID
            .iter()
            .map(|&s| solve_reduced(&b, &axis_param(n + 1, s), &f, &ReduceOpts::default(), None))
            .collect::<Result<Vec<_>>>()?;
        out.push((eps, f, sols));
    }
    Ok(out)
}

fn reduction_laws(data: &[(f64, FSpec, Vec<ReducedSolution>)]) -> Outcome {
    let reports: Vec<Vec<_>> = data.iter().map(|(_, f, sols)| sols.iter().map(|s| estimate_checks(s, f)).collect()).collect();
    let mut worst: f64 = 1.0;
    let mut min_u = f64::INFINITY;
    for pair in reports.windows(2) {
        for (a, b) in pair[0].iter().zip(&pair[1]) {
            for (x, y) in [(a.u_ratio, b.u_ratio), (a.lambda_ratio, b.lambda_ratio)] {
                let r = if x > y { x / y } else { y / x };
                worst = worst.max(r);
            }
            min_u = min_u.min(a.min_u).min(b.min_u);
        }
    }
    let ok = worst < 2.0 && min_u > 0.0;
    Ok((ok, format!("worst ratio change under eps halving {worst:.3}, min u {min_u:.4}")))
}

/// Non-axisymmetric `f` on a full-sphere backend, where `Lambda` has several components.
fn full_solves() -> Result<Vec<(FSpec, Vec<ReducedSolution>)>> {
    let dim = Dimension::new(5)?;
    let b = full_backend(&dim, 4, 1.0)?;
    let f0 = dim.f0;
    let term = |exps: [u32; 6], c: f64| Term { exps: exps.to_vec(), coeff: c * f0 };
    let mut out = Vec::new();
    for (a, c) in [(0.02, 0.03), (-0.01, 0.02), (0.015, -0.025)] {
        let f = FSpec::new(
            6,
            vec![
                term([0; 6], 1.0),
                term([1, 0, 0, 0, 0, 0], a),
                term([0, 1, 1, 0, 0, 0], c),
                term([0, 0, 0, 2, 0, 0], -0.02),
                term([0, 0, 1, 0, 0, 0], 0.015),
            ],
        )?;
        let sol = solve_reduced(&b, &BallParam::origin(6), &f, &ReduceOpts::default(), None)?;
        out.push((f, vec![sol]));
    }
    Ok(out)
}

fn multiplier_identity(data: &[(f64, FSpec, Vec<ReducedSolution>)]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut groups: Vec<(FSpec, Vec<ReducedSolution>)> = data.iter().map(|(_, f, s)| (f.clone(), s.clone())).collect();
    groups.extend(full_solves()?);
    for (f, sols) in &groups {
        for s in sols {
            let mf = multiplier_field(s, f)?;
            let a = &s.multipliers;
            let b = &mf.lambda_vec;
            let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            // 2 atan2(|a^ - b^|, |a^ + b^|) stays accurate near zero angle.
            let (mut minus, mut plus) = (0.0, 0.0);
            for (x, y) in a.iter().zip(b) {
                minus += (x / na - y / nb).powi(2);
                plus += (x / na + y / nb).powi(2);
            }
            worst = worst.max(2.0 * minus.sqrt().atan2(plus.sqrt()));
            count += 1;
        }
    }
    Ok((worst < 0.01, format!("{count} solves, max angle {worst:.2e} rad")))
}

fn expansion() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for n in [5, 6, 8] {
        let dim = Dimension::new(n)?;
        let c = calibrate(&dim)?;
        let m = n + 1;
        let lin = FSpec::kw_family(&dim, 0.1, 0);
        let e2 = SpherePoint::pole(m, 1);
        let e8 = expansion_error(&e2, &lin, 8.0, &c);
        let e32 = expansion_error(&e2, &lin, 32.0, &c);
        let (quad, p) = family_quadratic(&dim);
        let q: Vec<f64> = [8.0, 16.0, 32.0].iter().map(|&t| expansion_error(&p, &quad, t, &c)).collect();
        let stable = ((c.a1 - c.a1_alt) / c.a1).abs() < 0.01 && ((c.a2 - c.a2_alt) / c.a2).abs() < 0.01;
        let decreasing = q[0] > q[1] && q[1] > q[2];
        ok &= e8 < 0.10 && e32 < 0.02 && c.a1 != 0.0 && c.a2 != 0.0 && stable && decreasing;
        lines.push(format!(
            "n={n}: err(8) {e8:.4} err(32) {e32:.4} a1 {:.6} a2 {:.6} second family err(8,16,32) {:.4}/{:.4}/{:.4}",
            c.a1, c.a2, q[0], q[1], q[2]
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn degree_engine() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let opts = DegreeOpts { starts: 32, ..DegreeOpts::default() };
    for m in [6, 7, 9] {
        let id = |p: &[f64]| -> Result<Vec<f64>> { Ok(p.to_vec()) };
        let refl = |p: &[f64]| -> Result<Vec<f64>> {
            let mut v = p.to_vec();
            v[0] = -v[0];
            Ok(v)
        };
        let d1 = brouwer_degree(&id, m, 4.0, "identity", &opts)?.degree;
        let d2 = brouwer_degree(&refl, m, 4.0, "reflection", &opts)?.degree;
        ok &= d1 == 1 && d2 == -1;
        notes.push(format!("R^{m}: id {d1} refl {d2}"));
    }
    for n in [5, 6, 8] {
        let mut cfg = RunConfig::default();
        cfg.n = n;
        cfg.f.preset = Preset::GenericQuadratic;
        cfg.t0 = 20.0;
        let r = run_check(&cfg)?;
        let d = r.h3.degree.as_ref().map(|d| d.degree);
        let euler_ok = r.h3.euler_sum == r.h3.euler_expected;
        ok &= r.h3.stable && euler_ok && !r.h3.morse_degenerate;
        notes.push(format!(
            "n={n}: deg G {:?}/{:?}/{:?} euler {} (expect {})",
            d, r.h3.degree_refined, r.h3.degree_perturbed, r.h3.euler_sum, r.h3.euler_expected
        ));
        let dim = Dimension::new(n)?;
        let kw = FSpec::kw_family(&dim, 0.05, 0);
        let e = euler_sum(&morse_analysis(&kw, &MorseOpts::default()));
        ok &= e == r.h3.euler_expected;
    }
    Ok((ok, notes.join("; ")))
}

fn alignment() -> Outcome {
    let n = 6;
    let dim = Dimension::new(n)?;
    let b = axisym(n, 40)?;
    let f = FSpec::axisym_quadratic(&dim, 0.03, n);
    let mut points = Vec::new();
    for k in 0..=8 {
        let t = 6.0 + 0.5 * k as f64;
        for pole in [SpherePoint::pole(n + 1, n), SpherePoint::pole(n + 1, n).antipode()] {
            points.push(BallParam::from_center(&pole, t)?);
        }
    }
    let r = alignment_check(&b, &f, &points, &ReduceOpts::default())?;
    Ok((
        r.fraction_positive == 1.0,
        format!("{} samples, fraction G.A > 0 {:.3}, min cosine {:.4}", r.samples.len(), r.fraction_positive, r.min_cosine),
    ))
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir()?;
    let mut cfg = RunConfig::default();
    cfg.backend = BackendKind::Axisym;
    cfg.out = dir.path().to_path_buf();
    let (cert, outcome) = cmd_solve(&cfg, false)?;
    let Some(cert) = cert else {
        return Ok((false, format!("no certificate, outcome {outcome:?}")));
    };
    let g = cert.gates.as_ref();
    let ok = cert.pass
        && outcome.exit_code() == 0
        && cert.lambda_norm < 1e-6
        && cert.residual_sup < 1e-3
        && cert.min_u > 0.0
        && g.is_some_and(|g| g.kw.value < 1e-6);
    Ok((
        ok,
        format!(
            "|Lambda| {:.2e}, residual {:.2e}, min u {:.4}, KW {:.2e}",
            cert.lambda_norm,
            cert.residual_sup,
            cert.min_u,
            g.map_or(f64::NAN, |g| g.kw.value)
        ),
    ))
}

fn kw_gate() -> Outcome {
    let dir = tempfile::tempdir()?;
    let mut cfg = RunConfig::default();
    cfg.f.preset = Preset::Kw;
    cfg.f.eps = 0.05;
    cfg.f.direction = Some(6);
    cfg.out = dir.path().to_path_buf();
    let (cert, outcome) = cmd_solve(&cfg, true)?;
    let emitted_pass = cert.as_ref().is_some_and(|c| c.pass);
    let run = run_solve(&cfg)?;
    let again = run.certificate.pass;
    let f = cfg.fspec()?;
    let b = cfg.build_backend()?;
    let mut min_kw = f64::INFINITY;
    for (p, _) in &run.sweep {
        let sol = solve_reduced(&b, &BallParam::new(p.clone())?, &f, &ReduceOpts::default(), None)?;
        let kw = kw_residual(&reconstruct(&sol), &f);
        min_kw = min_kw.min(kw.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    }
    let deterministic = cert.as_ref().map(|c| c.lambda_norm) == Some(run.certificate.lambda_norm);
    let ok = !emitted_pass && !again && min_kw > cfg.tolerances.kw_gate && deterministic;
    Ok((
        ok,
        format!(
            "outcome {outcome:?}, {} sweep candidates, min KW residual {min_kw:.3e}, repeat identical {deterministic}",
            run.sweep.len()
        ),
    ))
}

fn aubin() -> Outcome {
    let n = 6;
    let dim = Dimension::new(n)?;
    let b = axisym(n, 40)?;
    let r = aubin_probe(&b, 0.95, dim.two_sharp, 50, 2)?;
    let lowest = r.starts.iter().filter(|s| s.feasible).map(|s| s.value).fold(f64::INFINITY, f64::min);
    let converged = r.starts.iter().filter(|s| s.converged).count();
    let ok = lowest >= dim.d_n - 1e-3 && lowest.is_finite();
    Ok((ok, format!("best {lowest:.12} vs d_n {}, {converged}/50 converged", dim.d_n)))
}

fn report(name: &str, started: Instant, r: Outcome) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match r {
        Ok((pass, detail)) => {
            println!("{} {name}: {detail} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" });
            pass
        }
        Err(e) => {
            println!("FAIL {name}: error {e} ({secs:.1} s)");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let t = Instant::now();
    all &= report("spectral symbol", t, spectral_symbol());
    let t = Instant::now();
    all &= report("constant identities", t, constants());
    let t = Instant::now();
    all &= report("conformal invariance", t, conformal_invariance());
    let t = Instant::now();
    all &= report("constant-f exact solve", t, constant_solve());
    let t = Instant::now();
    let data = law_solves();
    let elapsed = Instant::now();
    match data {
        Ok(d) => {
            all &= report("reduction laws", t, reduction_laws(&d));
            all &= report("multiplier identity", elapsed, multiplier_identity(&d));
        }
        Err(e) => {
            all &= report("reduction laws", t, Err(e));
            all &= report("multiplier identity", elapsed, Ok((false, "no solves".into())));
        }
    }
    let t = Instant::now();
    all &= report("expansion", t, expansion());
    let t = Instant::now();
    all &= report("degree engine", t, degree_engine());
    let t = Instant::now();
    all &= report("alignment", t, alignment());
    let t = Instant::now();
    all &= report("end-to-end existence", t, end_to_end());
    let t = Instant::now();
    all &= report("KW nonexistence gate", t, kw_gate());
    let t = Instant::now();
    all &= report("Aubin probe", t, aubin());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
