//! Two-term large-`t` expansion of `G` in the chart `pi_P` (projection from `-P`):
//!
//! ```text
//! G(P,t) ~ a1 grad f~(0) / t  (tangential)  +  a2 Lap f~(0) / t^2  (along P)
//! ```
//!
//! The coefficients are calibrated against [`g_map`] on functions with known chart
//! derivatives, by fitting `y(t) = a + b/t^2` over a ladder of large `t`.

use crate::error::{Error, Result};
use crate::fspec::{FSpec, Term};
use crate::geometry::{dot, norm, BallParam, Dimension, Frame, SpherePoint};

use super::gmap::g_map;

/// Ladder used by [`calibrate`].
pub const CALIBRATION_T: [f64; 4] = [16.0, 32.0, 64.0, 128.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoeffs {
    pub a1: f64,
    pub a2: f64,
    /// The same coefficients from the second calibration family.
    pub a1_alt: f64,
    pub a2_alt: f64,
}

/// Chart gradient and Euclidean Laplacian of `f~ = f o pi_P^{-1}` at the origin.
///
/// `grad_i = 2 <grad f(P), H e_i>` in the chart frame `H` of `-P`, and
/// `Lap f~(0) = -4 Delta_h f(P)` (geometer's sign on the sphere).
pub fn chart_derivatives(f: &FSpec, p: &SpherePoint) -> (Vec<f64>, f64) {
    let x = p.coords();
    let g = f.grad_sphere(x);
    let frame = Frame::new(p.antipode().coords());
    let n = x.len() - 1;
    let grad = (0..n).map(|i| 2.0 * dot(&g, &frame.column(i))).collect();
    (grad, -4.0 * f.laplacian_h(x))
}

/// Predicted `G(P,t)` as an ambient vector.
pub fn g_expansion(p: &SpherePoint, f: &FSpec, t: f64, c: &ExpansionCoeffs) -> Vec<f64> {
    let x = p.coords();
    let g = f.grad_sphere(x);
    let lap = -4.0 * f.laplacian_h(x);
    // sum_i grad_i H e_i = 2 grad f(P) for any orthonormal tangent frame
    g.iter()
        .zip(x)
        .map(|(gi, pi)| c.a1 * 2.0 * gi / t + c.a2 * lap / (t * t) * pi)
        .collect()
}

/// Intercept of the least-squares fit `y = a + b/t^2`.
fn intercept(ts: &[f64], ys: &[f64]) -> f64 {
    let k = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| 1.0 / (t * t)).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let b = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    (sy - b * sx) / k
}

fn tangential_ratio(f: &FSpec, p: &SpherePoint, t: f64) -> f64 {
    let gv = g_map(&BallParam::from_center(p, t).expect("t >= 1"), f);
    let x = p.coords();
    let grad2: Vec<f64> = f.grad_sphere(x).iter().map(|g| 2.0 * g).collect();
    let along = dot(&gv, x);
    let tang: Vec<f64> = gv.iter().zip(x).map(|(g, pi)| g - along * pi).collect();
    t * dot(&tang, &grad2) / dot(&grad2, &grad2)
}

fn radial_ratio(f: &FSpec, p: &SpherePoint, t: f64) -> f64 {
    let gv = g_map(&BallParam::from_center(p, t).expect("t >= 1"), f);
    t * t * dot(&gv, p.coords()) / (-4.0 * f.laplacian_h(p.coords()))
}

/// First calibration family `f0 (1 + eps xi_1)`; probed at `e_2` for `a1` and `e_1` for `a2`.
pub fn family_linear(dim: &Dimension) -> FSpec {
    FSpec::kw_family(dim, 0.1, 0)
}

/// Second family `f0 (1 + eps (x1^2 - x2^2 + x1 x3))` at `(e1 + e2 + e3)/sqrt 3`.
pub fn family_quadratic(dim: &Dimension) -> (FSpec, SpherePoint) {
    let m = dim.ambient();
    let eps = 0.1;
    let mono = |pairs: &[(usize, u32)], c: f64| {
        let mut exps = vec![0; m];
        for &(i, e) in pairs {
            exps[i] += e;
        }
        Term { exps, coeff: c }
    };
    let f = FSpec::new(
        m,
        vec![
            mono(&[], dim.f0),
            mono(&[(0, 2)], dim.f0 * eps),
            mono(&[(1, 2)], -dim.f0 * eps),
            mono(&[(0, 1), (2, 1)], dim.f0 * eps),
        ],
    )
    .expect("well-formed polynomial");
    let mut c = vec![0.0; m];
    c[..3].iter_mut().for_each(|v| *v = 1.0 / 3f64.sqrt());
    (f, SpherePoint::normalized(c).expect("nonzero"))
}

/// Fit `a1`, `a2` on both calibration families.
pub fn calibrate(dim: &Dimension) -> Result<ExpansionCoeffs> {
    let m = dim.ambient();
    let lin = family_linear(dim);
    let e1 = SpherePoint::pole(m, 0);
    let e2 = SpherePoint::pole(m, 1);
    let ts = CALIBRATION_T;
    let fit = |g: &dyn Fn(f64) -> f64| intercept(&ts, &ts.iter().map(|&t| g(t)).collect::<Vec<_>>());
    let a1 = fit(&|t| tangential_ratio(&lin, &e2, t));
    let a2 = fit(&|t| radial_ratio(&lin, &e1, t));
    let (quad, p) = family_quadratic(dim);
    let a1_alt = fit(&|t| tangential_ratio(&quad, &p, t));
    let a2_alt = fit(&|t| radial_ratio(&quad, &p, t));
    let c = ExpansionCoeffs { a1, a2, a1_alt, a2_alt };
    if [a1, a2, a1_alt, a2_alt].iter().any(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::Degenerate(format!("calibration produced {c:?}")));
    }
    Ok(c)
}

/// Relative error `|G_pred - G| / |G|` at `(P, t)`.
pub fn expansion_error(p: &SpherePoint, f: &FSpec, t: f64, c: &ExpansionCoeffs) -> f64 {
    let g = g_map(&BallParam::from_center(p, t).expect("t >= 1"), f);
    let pred = g_expansion(p, f, t, c);
    let diff: Vec<f64> = g.iter().zip(&pred).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&g)
}
