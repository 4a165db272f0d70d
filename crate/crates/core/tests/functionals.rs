use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use qcurv::functionals::{
    aubin_probe, check_compatible, energy, kw_residual, lq_power, pde_residual, quotient_jaq, quotient_jbar,
};
use qcurv::geometry::{pullback_t, BallParam, Dimension, SpherePoint};
use qcurv::spectral::{axisym_backend, axisym_nodes_for, Backend, Field};
use qcurv::{Error, FSpec};

fn axisym(n: usize, l: usize) -> Arc<dyn Backend> {
    let dim = Dimension::new(n).unwrap();
    axisym_backend(&dim, axisym_nodes_for(&dim, l), l, n).unwrap()
}

#[test]
fn constants_attain_d_n() {
    for n in [5, 6, 8] {
        let b = axisym(n, 12);
        let d = b.dim().clone();
        let one = Field::constant(&b, 1.0);
        assert_relative_eq!(energy(&one).total(1.0), d.d_n, max_relative = 1e-13);
        for a in [0.5, 0.95, 1.0] {
            assert_relative_eq!(quotient_jaq(&one, a, d.two_sharp).unwrap(), d.d_n, max_relative = 1e-12);
        }
    }
}

#[test]
fn bubbles_attain_d_n() {
    // T_phi 1 is an extremal of the sharp inequality for every dilation.
    let n = 6;
    let b = axisym(n, 40);
    let d = b.dim().clone();
    for t in [1.5, 2.5, 4.0] {
        let p = BallParam::from_center(&SpherePoint::north(n + 1), t).unwrap();
        let bubble = Field::from_fn(&b, pullback_t(&p, |_| 1.0));
        let j = quotient_jaq(&bubble, 1.0, d.two_sharp).unwrap();
        assert_relative_eq!(j, d.d_n, max_relative = 1e-6);
    }
}

#[test]
fn energy_splits_by_term() {
    let b = axisym(5, 6);
    let d = b.dim().clone();
    let xi = Field::from_fn(&b, |x| x[5]);
    let e = energy(&xi);
    // avg xi^2 = 1/(n+1); grad and Laplacian pick up lambda_1 = n and n^2.
    let l2 = 1.0 / 6.0;
    assert_relative_eq!(e.mass, d.d_n * l2, max_relative = 1e-12);
    assert_relative_eq!(e.grad, d.c_n * 5.0 * l2, max_relative = 1e-12);
    assert_relative_eq!(e.biharm, 25.0 * l2, max_relative = 1e-12);
}

#[test]
fn zero_field_has_no_quotient() {
    let b = axisym(5, 4);
    assert!(matches!(quotient_jaq(&Field::constant(&b, 0.0), 1.0, 10.0), Err(Error::Degenerate(_))));
}

#[test]
fn constant_solution_has_zero_residual() {
    for n in [5, 6, 8] {
        let b = axisym(n, 10);
        let d = b.dim().clone();
        let c = 2.3 * d.f0;
        let u = Field::constant(&b, d.constant_solution(c));
        let r = pde_residual(&u, &FSpec::constant(n + 1, c));
        assert!(r.sup < 1e-12, "n = {n}: {}", r.sup);
    }
}

#[test]
fn kazdan_warner_moment_of_a_constant() {
    // f = f0 (1 + eps xi_a), u = 1: avg <grad f, grad xi_a> = eps f0 n/(n+1).
    for n in [5, 6] {
        let b = axisym(n, 8);
        let d = b.dim().clone();
        let eps = 0.05;
        let f = FSpec::kw_family(&d, eps, n);
        let kw = kw_residual(&Field::constant(&b, 1.0), &f);
        assert_relative_eq!(kw[n], eps * d.f0 * n as f64 / (n + 1) as f64, max_relative = 1e-12);
        assert!(kw[..n].iter().all(|v| v.abs() < 1e-14));
    }
}

#[test]
fn shifted_quotient_of_constant_f() {
    // For f = f0 the quotient of u = 1 at the identity is d_n / f0^{2/2#}.
    let n = 6;
    let b = axisym(n, 8);
    let d = b.dim().clone();
    let f = FSpec::constant(n + 1, d.f0);
    let j = quotient_jbar(&Field::constant(&b, 1.0), &BallParam::origin(n + 1), &f).unwrap();
    assert_relative_eq!(j, d.d_n * d.f0.powf(-2.0 / d.two_sharp), max_relative = 1e-12);
}

#[test]
fn axisym_backend_rejects_off_axis_f() {
    let b = axisym(6, 8);
    let d = b.dim().clone();
    let f = FSpec::kw_family(&d, 0.05, 0);
    assert!(check_compatible(b.as_ref(), &f).is_err());
    assert!(check_compatible(b.as_ref(), &FSpec::kw_family(&d, 0.05, 6)).is_ok());
}

#[test]
fn aubin_probe_respects_the_lower_bound() {
    let b = axisym(6, 24);
    let d = b.dim().clone();
    let r = aubin_probe(&b, 0.95, d.two_sharp, 6, 3).unwrap();
    assert!(r.best >= d.d_n - 1e-3, "best {}", r.best);
    assert!(r.starts.iter().filter(|s| s.converged).count() >= 5);
    assert!(aubin_probe(&b, 1.5, d.two_sharp, 1, 0).is_err());
    assert!(aubin_probe(&b, 0.9, 2.0, 1, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quotient_is_scale_invariant(c in prop::collection::vec(-0.3f64..0.3, 8), s in 0.1f64..10.0) {
        let b = axisym(6, 7);
        let mut coeffs = c.clone();
        coeffs[0] = 1.0;
        let u = Field::from_coeffs(&b, coeffs.clone());
        let v = Field::from_coeffs(&b, coeffs.iter().map(|x| s * x).collect());
        let q = b.dim().two_sharp;
        let (ju, jv) = (quotient_jaq(&u, 1.0, q).unwrap(), quotient_jaq(&v, 1.0, q).unwrap());
        prop_assert!((ju - jv).abs() < 1e-10 * ju);
        prop_assert!(ju >= b.dim().d_n * (1.0 - 1e-9));
    }

    #[test]
    fn lq_power_is_homogeneous(c in prop::collection::vec(-0.3f64..0.3, 8), s in 0.1f64..4.0) {
        let b = axisym(5, 7);
        let mut coeffs = c.clone();
        coeffs[0] = 1.0;
        let u = Field::from_coeffs(&b, coeffs.clone());
        let v = u.scaled(s);
        let q = b.dim().two_sharp;
        prop_assert!((lq_power(&v, q) - s.powf(q) * lq_power(&u, q)).abs() < 1e-10 * s.powf(q) * lq_power(&u, q));
    }
}
