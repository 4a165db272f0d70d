use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use qcurv::geometry::{sphere_moment, Dimension};
use qcurv::spectral::{
    axisym_backend, axisym_nodes_for, full_backend, gauss_gegenbauer, Backend, Field, PointwiseOp, BASIS_ENTRY_CAP,
};
use qcurv::Error;

fn axisym(n: usize, l: usize) -> Arc<dyn Backend> {
    let dim = Dimension::new(n).unwrap();
    axisym_backend(&dim, axisym_nodes_for(&dim, l), l, n).unwrap()
}

fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    (0..b).fold(1, |acc, i| acc * (a - i) / (i + 1))
}

#[test]
fn gauss_rule_integrates_latitude_moments() {
    // With alpha = (n-2)/2 the rule averages functions of x_axis over S^n.
    for n in [5, 6, 8] {
        let k = 12;
        let (mu, w) = gauss_gegenbauer(k, (n as f64 - 2.0) / 2.0).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        for j in 0..k {
            let got: f64 = mu.iter().zip(&w).map(|(x, wi)| wi * x.powi(2 * j as i32)).sum();
            let mut e = vec![0; n + 1];
            e[n] = 2 * j as u32;
            assert_relative_eq!(got, sphere_moment(n, &e), max_relative = 1e-11);
        }
        for (a, b) in mu.iter().zip(mu.iter().rev()) {
            assert_eq!(*a, -*b);
        }
    }
}

#[test]
fn full_backend_mode_count_matches_harmonic_dimensions() {
    let dim = Dimension::new(5).unwrap();
    let b = full_backend(&dim, 4, 1.0).unwrap();
    let n = 5;
    let expected: usize = (0..=4).map(|k| binomial(n + k, n) - if k >= 2 { binomial(n + k - 2, n) } else { 0 }).sum();
    assert_eq!(b.n_modes(), expected);
    assert!(b.gram_deviation() < 1e-10);
    assert!(b.symmetry_axis().is_none());
}

#[test]
fn axisym_basis_is_orthonormal() {
    for n in [5, 6, 8] {
        let b = axisym(n, 24);
        assert_eq!(b.n_modes(), 25);
        assert!(b.gram_deviation() < 1e-10, "n = {n}");
        assert_eq!(b.symmetry_axis(), Some(n));
    }
}

#[test]
fn first_harmonics_are_eigenfunctions() {
    let dim = Dimension::new(5).unwrap();
    let b = full_backend(&dim, 3, 1.0).unwrap();
    for j in 0..6 {
        let xi = Field::from_fn(&b, |x| x[j]);
        let lap = xi.laplacian();
        let pan = xi.paneitz(1.0);
        for k in 0..b.n_nodes() {
            let v = b.node(k)[j];
            assert!((lap.values()[k] - 5.0 * v).abs() < 1e-11);
            assert!((pan.values()[k] - 59.0625 * v).abs() < 1e-10);
        }
    }
}

#[test]
fn zonal_quadratic_has_degree_two_eigenvalue() {
    for n in [5, 6, 8] {
        let b = axisym(n, 8);
        let m = (n + 1) as f64;
        let g = Field::from_fn(&b, |x| x[n] * x[n] - 1.0 / m);
        let lap = g.laplacian();
        for k in 0..b.n_nodes() {
            assert!((lap.values()[k] - 2.0 * m * g.values()[k]).abs() < 1e-11);
        }
    }
}

#[test]
fn polynomials_round_trip_exactly() {
    let b = axisym(6, 10);
    let g = |x: &[f64]| 1.0 + 0.3 * x[6] - 2.0 * x[6].powi(5) + x[6].powi(10);
    let f = Field::from_fn(&b, g);
    for k in 0..b.n_nodes() {
        assert!((f.values()[k] - g(b.node(k))).abs() < 1e-12);
    }
    let x = [0.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.8];
    assert!((f.eval(&x) - g(&x)).abs() < 1e-12);
}

#[test]
fn mean_and_decomposition() {
    let b = axisym(6, 8);
    let f = Field::from_fn(&b, |x| 2.0 + 0.5 * x[6] + x[6] * x[6]);
    let (mean, h, psi) = f.decompose();
    assert_relative_eq!(mean, 2.0 + 1.0 / 7.0, epsilon = 1e-13);
    assert_relative_eq!(h[6], 0.5, epsilon = 1e-13);
    assert!(h[..6].iter().all(|v| v.abs() < 1e-13));
    assert!(psi.coeffs()[..2].iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn negative_power_of_zero_is_an_error() {
    let b = axisym(5, 6);
    let zero = Field::constant(&b, 0.0);
    assert!(matches!(zero.pointwise(None, PointwiseOp::AbsPow(-1.0)), Err(Error::ZeroToNegativePower)));
    assert!(zero.pointwise(None, PointwiseOp::Add).is_err());
}

#[test]
fn basis_cap_rejects_oversized_grids() {
    let dim = Dimension::new(6).unwrap();
    let err = full_backend(&dim, 6, 1.0).unwrap_err();
    assert!(matches!(err, Error::NodeCap { .. }), "{err}");
    assert!(BASIS_ENTRY_CAP > 0);
}

#[test]
fn resolution_bound_is_linear_in_band_limit() {
    let b = axisym(6, 40);
    assert_eq!(b.resolution_bound(0.25), 10.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesis_then_analysis_is_identity(c in prop::collection::vec(-1.0f64..1.0, 17)) {
        let b = axisym(8, 16);
        let back = b.analyze(&b.synthesize(&c));
        for (x, y) in back.iter().zip(&c) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn paneitz_is_linear_and_symmetric(
        c1 in prop::collection::vec(-1.0f64..1.0, 13),
        c2 in prop::collection::vec(-1.0f64..1.0, 13),
        s in -3.0f64..3.0,
    ) {
        let b = axisym(5, 12);
        let u = Field::from_coeffs(&b, c1.clone());
        let v = Field::from_coeffs(&b, c2.clone());
        let sum = Field::from_coeffs(&b, c1.iter().zip(&c2).map(|(a, c)| a + s * c).collect());
        let lhs = sum.paneitz(1.0);
        let (pu, pv) = (u.paneitz(1.0), v.paneitz(1.0));
        for k in 0..13 {
            let rhs = pu.coeffs()[k] + s * pv.coeffs()[k];
            prop_assert!((lhs.coeffs()[k] - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
        }
        let uv: f64 = pu.coeffs().iter().zip(v.coeffs()).map(|(a, c)| a * c).sum();
        let vu: f64 = pv.coeffs().iter().zip(u.coeffs()).map(|(a, c)| a * c).sum();
        prop_assert!((uv - vu).abs() < 1e-9 * uv.abs().max(1.0));
    }

    #[test]
    fn paneitz_is_positive(c in prop::collection::vec(-1.0f64..1.0, 13)) {
        let b = axisym(6, 12);
        let dim = b.dim().clone();
        let u = Field::from_coeffs(&b, c.clone());
        let e: f64 = u.paneitz(1.0).coeffs().iter().zip(&c).map(|(a, x)| a * x).sum();
        let l2: f64 = c.iter().map(|x| x * x).sum();
        prop_assert!(e >= dim.d_n * l2 * (1.0 - 1e-12));
    }
}
