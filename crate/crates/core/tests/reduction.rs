use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use qcurv::degree::{find_lambda_zero, ZeroOpts};
use qcurv::functionals::shifted_values;
use qcurv::geometry::{BallParam, Dimension};
use qcurv::reduction::{
    continuation_sweep, estimate_checks, multiplier_field, solve_reduced, ReduceOpts, ReducedSolution,
};
use qcurv::spectral::{axisym_backend, axisym_nodes_for, full_backend, Backend};
use qcurv::{Error, FSpec, Term};

fn axisym(n: usize, l: usize) -> Arc<dyn Backend> {
    let dim = Dimension::new(n).unwrap();
    axisym_backend(&dim, axisym_nodes_for(&dim, l), l, n).unwrap()
}

fn on_axis(m: usize, s: f64) -> BallParam {
    let mut v = vec![0.0; m];
    v[m - 1] = s;
    BallParam::new(v).unwrap()
}

fn solve(b: &Arc<dyn Backend>, f: &FSpec, s: f64) -> ReducedSolution {
    solve_reduced(b, &on_axis(b.dim().ambient(), s), f, &ReduceOpts::default(), None).unwrap()
}

/// `avg f_p |u|^{2#}`, the constraint the minimizer is normalized by.
fn constraint(sol: &ReducedSolution, f: &FSpec) -> f64 {
    let b = sol.u.backend();
    let q = b.dim().two_sharp;
    let fp = shifted_values(b.as_ref(), &sol.p, f);
    b.integrate(&sol.u.values().iter().zip(&fp).map(|(u, w)| w * u.abs().powf(q)).collect::<Vec<_>>())
}

#[test]
fn preset_solves_across_the_axis() {
    let n = 6;
    let b = axisym(n, 40);
    let dim = b.dim().clone();
    let f = FSpec::axisym_quadratic(&dim, 0.03, n);
    for s in [0.0, 0.3, -0.5, 0.8, 0.875] {
        let sol = solve(&b, &f, s);
        assert!(sol.min_u > 0.0, "s = {s}");
        assert!(sol.el_residual < 1e-8, "s = {s}: {}", sol.el_residual);
        assert!(!sol.indefinite);
        assert_relative_eq!(constraint(&sol, &f), 1.0, epsilon = 1e-9);
    }
}

#[test]
fn constant_f_gives_the_constant() {
    let n = 5;
    let b = axisym(n, 16);
    let dim = b.dim().clone();
    let f = FSpec::constant(n + 1, dim.f0);
    let sol = solve(&b, &f, 0.0);
    let u0 = dim.f0.powf(-1.0 / dim.two_sharp);
    for v in sol.u.values() {
        assert_relative_eq!(*v, u0, max_relative = 1e-12);
    }
    assert_relative_eq!(sol.m_p, dim.d_n * u0 * u0, max_relative = 1e-12);
    assert!(sol.multiplier_norm() < 1e-12);
    assert!(sol.dist_to_constant < 1e-12);
    assert_relative_eq!(sol.rescale_factor() * u0, 1.0, max_relative = 1e-12);
}

#[test]
fn multipliers_are_odd_for_even_f() {
    let n = 6;
    let b = axisym(n, 40);
    let f = FSpec::axisym_quadratic(b.dim(), 0.03, n);
    assert!(solve(&b, &f, 0.0).multiplier_norm() < 1e-12);
    for s in [0.2, 0.6] {
        let (plus, minus) = (solve(&b, &f, s), solve(&b, &f, -s));
        assert!(plus.multipliers[n].abs() > 1e-6);
        assert_relative_eq!(plus.multipliers[n], -minus.multipliers[n], max_relative = 1e-8);
    }
}

#[test]
fn fitted_multipliers_match_c_inverse_a() {
    // Lambda = (n-4)/2 C^{-1} A, on both backends.
    let n = 6;
    let b = axisym(n, 40);
    let f = FSpec::axisym_quadratic(b.dim(), 0.03, n);
    let sol = solve(&b, &f, 0.5);
    let mf = multiplier_field(&sol, &f).unwrap();
    assert_relative_eq!(sol.multipliers[n], mf.lambda_vec[n], max_relative = 1e-6);

    let dim = Dimension::new(5).unwrap();
    let full = full_backend(&dim, 4, 1.0).unwrap();
    let term = |exps: Vec<u32>, c: f64| Term { exps, coeff: c * dim.f0 };
    let g = FSpec::new(
        6,
        vec![term(vec![0; 6], 1.0), term(vec![1, 0, 0, 0, 0, 0], 0.02), term(vec![0, 1, 1, 0, 0, 0], 0.03)],
    )
    .unwrap();
    let sol = solve_reduced(&full, &BallParam::origin(6), &g, &ReduceOpts::default(), None).unwrap();
    let mf = multiplier_field(&sol, &g).unwrap();
    for (a, c) in sol.multipliers.iter().zip(&mf.lambda_vec) {
        assert!((a - 0.5 * c).abs() < 1e-8 * mf.lambda_vec[0].abs(), "{a} vs {c}");
    }
    assert!(mf.condition.is_finite());
}

#[test]
fn estimates_scale_with_eps() {
    let n = 6;
    let b = axisym(n, 40);
    let dim = b.dim().clone();
    let ratio = |eps: f64| {
        let f = FSpec::axisym_quadratic(&dim, eps, n);
        estimate_checks(&solve(&b, &f, 0.5), &f)
    };
    let (r1, r2) = (ratio(0.04), ratio(0.02));
    assert!(r1.f_dev > 0.0 && r1.min_u > 0.0);
    assert!((r1.u_ratio / r2.u_ratio - 1.0).abs() < 0.1);
    assert!((r1.lambda_ratio / r2.lambda_ratio - 1.0).abs() < 0.1);
}

#[test]
fn solver_is_deterministic() {
    let b = axisym(6, 24);
    let f = FSpec::axisym_quadratic(b.dim(), 0.03, 6);
    let (a, c) = (solve(&b, &f, 0.4), solve(&b, &f, 0.4));
    assert_eq!(a.u.coeffs(), c.u.coeffs());
    assert_eq!(a.multipliers, c.multipliers);
}

#[test]
fn invalid_parameters_are_rejected() {
    let n = 6;
    let b = axisym(n, 8);
    let f = FSpec::axisym_quadratic(b.dim(), 0.03, n);
    let opts = ReduceOpts::default();
    let off = BallParam::new(vec![0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(matches!(solve_reduced(&b, &off, &f, &opts, None), Err(Error::UnsupportedCenter { .. })));
    // Band limit 8 resolves t <= 2.
    assert!(matches!(solve_reduced(&b, &on_axis(7, 0.75), &f, &opts, None), Err(Error::Resolution { .. })));
    let negative = FSpec::constant(7, -1.0);
    assert!(matches!(solve_reduced(&b, &on_axis(7, 0.0), &negative, &opts, None), Err(Error::NonPositive(_))));
    let path = [on_axis(7, 0.0), on_axis(7, 0.4)];
    assert!(continuation_sweep(&b, &f, &path, &opts).is_err());
}

#[test]
fn continuation_matches_cold_starts() {
    let n = 6;
    let b = axisym(n, 40);
    let f = FSpec::axisym_quadratic(b.dim(), 0.03, n);
    let path: Vec<BallParam> = (0..6).map(|i| on_axis(7, 0.15 * i as f64)).collect();
    let sweep = continuation_sweep(&b, &f, &path, &ReduceOpts::default()).unwrap();
    for (warm, p) in sweep.iter().zip(&path) {
        let cold = solve_reduced(&b, p, &f, &ReduceOpts::default(), None).unwrap();
        assert_relative_eq!(warm.m_p, cold.m_p, max_relative = 1e-10);
    }
}

#[test]
fn zero_search_at_the_symmetric_point() {
    let n = 6;
    let b = axisym(n, 40);
    let f = FSpec::axisym_quadratic(b.dim(), 0.03, n);
    let z = find_lambda_zero(&b, &f, 8.0, &ZeroOpts::default()).unwrap();
    let sol = z.solution.unwrap();
    assert!(sol.p.is_identity());
    assert_eq!(z.evaluations, 1);
}

#[test]
fn zero_search_bisects_off_the_origin() {
    // A small cubic breaks the symmetry, moving the zero away from p = 0.
    let n = 6;
    let b = axisym(n, 40);
    let dim = b.dim().clone();
    let quad = FSpec::axisym_quadratic(&dim, 0.03, n);
    let cubic = FSpec::zonal_cubic(&dim, 0.02, n);
    let mut terms = quad.terms().to_vec();
    terms.extend(cubic.terms().iter().cloned());
    let f = FSpec::new(7, terms).unwrap().add_constant(-dim.f0);
    let z = find_lambda_zero(&b, &f, 8.0, &ZeroOpts::default()).unwrap();
    let sol = z.solution.expect("zero found");
    assert!(sol.multiplier_norm() < 1e-8);
    assert!(sol.p.radius() > 1e-4);
    assert!(z.brackets >= 1, "{}", z.note);
    assert_eq!(z.sweep.len(), 32);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn minimizer_is_positive_and_normalized(s in -0.8f64..0.8, eps in 0.005f64..0.05) {
        let n = 6;
        let b = axisym(n, 40);
        let f = FSpec::axisym_quadratic(b.dim(), eps, n);
        let sol = solve(&b, &f, s);
        prop_assert!(sol.min_u > 0.0);
        prop_assert!((constraint(&sol, &f) - 1.0).abs() < 1e-9);
        prop_assert!(sol.m_p > 0.0);
    }
}
