//! Dimension constants, points of S^n, stereographic charts and the conformal
//! dilations `phi_{P,t}`.
//!
//! All integrals in this crate are volume-normalized averages over the sphere.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Dimension-derived constants of the Paneitz problem on S^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub n: usize,
    pub c_n: f64,
    pub d_n: f64,
    pub two_sharp: f64,
    pub f0: f64,
    pub omega_n: f64,
    /// `pi^2 n (n-4)(n^2-4) Gamma(n/2)^{4/n} Gamma(n)^{-4/n}`, the sharp-constant
    /// expression evaluated literally.
    pub k0_raw: f64,
    /// `k0_raw * omega_n^{-4/n}`; equals `d_n`, the Sobolev quotient of constants.
    pub k0_inv_scaled: f64,
}

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 5 {
            return Err(Error::Dimension(n));
        }
        let nf = n as f64;
        let c_n = (nf * nf - 2.0 * nf - 4.0) / 2.0;
        let d_n = (nf - 4.0) * nf * (nf * nf - 4.0) / 16.0;
        let two_sharp = 2.0 * nf / (nf - 4.0);
        let f0 = nf * (nf * nf - 4.0) / 8.0;
        let ln_omega = 2f64.ln() + (nf + 1.0) / 2.0 * PI.ln() - ln_gamma((nf + 1.0) / 2.0);
        let omega_n = ln_omega.exp();
        let ln_k0 = (PI * PI * nf * (nf - 4.0) * (nf * nf - 4.0)).ln()
            + 4.0 / nf * (ln_gamma(nf / 2.0) - ln_gamma(nf));
        let k0_raw = ln_k0.exp();
        let k0_inv_scaled = (ln_k0 - 4.0 / nf * ln_omega).exp();
        Ok(Self {
            n,
            c_n,
            d_n,
            two_sharp,
            f0,
            omega_n,
            k0_raw,
            k0_inv_scaled,
        })
    }

    /// Ambient dimension n + 1.
    pub fn ambient(&self) -> usize {
        self.n + 1
    }

    /// Eigenvalue `k(k+n-1)` of the (nonnegative) Laplace-Beltrami operator on degree-k harmonics.
    pub fn lambda(&self, k: usize) -> f64 {
        let k = k as f64;
        k * (k + self.n as f64 - 1.0)
    }

    /// Weighted symbol `a*lambda_k^2 + a*c_n*lambda_k + d_n`.
    pub fn paneitz_symbol(&self, k: usize, a: f64) -> f64 {
        let l = self.lambda(k);
        a * l * l + a * self.c_n * l + self.d_n
    }

    /// Exponent `(n-4)/(2n)` of the Jacobian in the weighted pullback.
    pub fn pullback_exponent(&self) -> f64 {
        (self.n as f64 - 4.0) / (2.0 * self.n as f64)
    }

    /// Constant `(f0/f)^{(n-4)/8}` solving the equation for constant curvature `f`.
    pub fn constant_solution(&self, f: f64) -> f64 {
        (self.f0 / f).powf((self.n as f64 - 4.0) / 8.0)
    }
}

pub fn make_dimension(n: usize) -> Result<Dimension> {
    Dimension::new(n)
}

pub fn paneitz_symbol(dim: &Dimension, k: usize, a: f64) -> f64 {
    dim.paneitz_symbol(k, a)
}

/// Normalized moment `avg_{S^n} x^gamma` (zero unless every exponent is even).
pub fn sphere_moment(n: usize, exps: &[u32]) -> f64 {
    if exps.iter().any(|e| e % 2 == 1) {
        return 0.0;
    }
    let m = (n + 1) as f64;
    let total: u32 = exps.iter().sum();
    let half_ln_pi = 0.5 * PI.ln();
    let mut ln = ln_gamma(m / 2.0) - ln_gamma((total as f64 + m) / 2.0);
    for &e in exps {
        if e > 0 {
            ln += ln_gamma((e as f64 + 1.0) / 2.0) - half_ln_pi;
        }
    }
    ln.exp()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn unit(n_ambient: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n_ambient];
    e[i] = 1.0;
    e
}

/// A point of the unit sphere in R^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if (r - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("|x| = {r} is not 1")));
        }
        Ok(Self(coords))
    }

    /// Radial projection of a nonzero vector.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if r == 0.0 || !r.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize zero vector".into()));
        }
        coords.iter_mut().for_each(|c| *c /= r);
        Ok(Self(coords))
    }

    pub fn pole(n_ambient: usize, i: usize) -> Self {
        Self(unit(n_ambient, i))
    }

    /// The north pole `e_{n+1}`.
    pub fn north(n_ambient: usize) -> Self {
        Self::pole(n_ambient, n_ambient - 1)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn antipode(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }
}

/// Householder reflection `H` with `H e_{n+1} = q`; symmetric and orthogonal.
#[derive(Debug, Clone)]
pub struct Frame {
    v: Vec<f64>,
    vv: f64,
}

impl Frame {
    pub fn new(q: &[f64]) -> Self {
        let m = q.len();
        let mut v: Vec<f64> = q.iter().map(|c| -c).collect();
        v[m - 1] += 1.0;
        let vv = dot(&v, &v);
        if vv < 1e-28 {
            Self { v: vec![0.0; m], vv: 0.0 }
        } else {
            Self { v, vv }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        if self.vv == 0.0 {
            return x.to_vec();
        }
        let s = 2.0 * dot(&self.v, x) / self.vv;
        x.iter().zip(&self.v).map(|(a, b)| a - s * b).collect()
    }

    /// Column `H e_i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.apply(&unit(self.v.len(), i))
    }
}

/// Stereographic projection from `pole`: with the north pole this is
/// `y = x'/(1 - x_{n+1})`, inverse `x = (2y, |y|^2-1)/(|y|^2+1)`.
pub fn stereo_project(pole: &SpherePoint, x: &[f64]) -> Result<Vec<f64>> {
    let h = Frame::new(pole.coords());
    let xt = h.apply(x);
    let m = xt.len();
    let den = 1.0 - xt[m - 1];
    if den.abs() < 1e-14 {
        return Err(Error::ChartSingularity);
    }
    Ok(xt[..m - 1].iter().map(|c| c / den).collect())
}

pub fn stereo_inverse(pole: &SpherePoint, y: &[f64]) -> SpherePoint {
    let h = Frame::new(pole.coords());
    let r2 = dot(y, y);
    let mut xt: Vec<f64> = y.iter().map(|c| 2.0 * c / (r2 + 1.0)).collect();
    xt.push((r2 - 1.0) / (r2 + 1.0));
    SpherePoint(h.apply(&xt))
}

/// Chart used by the large-t expansion: projection from `-P`, so `P` sits at the origin.
pub fn expansion_chart(p: &SpherePoint, x: &[f64]) -> Result<Vec<f64>> {
    stereo_project(&p.antipode(), x)
}

pub fn expansion_chart_inverse(p: &SpherePoint, z: &[f64]) -> SpherePoint {
    stereo_inverse(&p.antipode(), z)
}

/// Point `p = ((t-1)/t) P` of the open unit ball parametrizing the dilations.
#[derive(Debug, Clone, PartialEq)]
pub struct BallParam {
    p: Vec<f64>,
}

impl BallParam {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if norm(&p) >= 1.0 || p.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("ball parameter must satisfy |p| < 1".into()));
        }
        Ok(Self { p })
    }

    pub fn origin(n_ambient: usize) -> Self {
        Self { p: vec![0.0; n_ambient] }
    }

    pub fn from_center(center: &SpherePoint, t: f64) -> Result<Self> {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("t = {t} must be >= 1")));
        }
        let s = (t - 1.0) / t;
        Ok(Self { p: center.coords().iter().map(|c| s * c).collect() })
    }

    pub fn coords(&self) -> &[f64] {
        &self.p
    }

    pub fn radius(&self) -> f64 {
        norm(&self.p)
    }

    /// `t = 1/(1-|p|)`.
    pub fn t(&self) -> f64 {
        1.0 / (1.0 - self.radius())
    }

    /// Concentration point `P`; `e_{n+1}` at the origin, where nothing depends on it.
    pub fn center(&self) -> SpherePoint {
        let r = self.radius();
        if r == 0.0 {
            SpherePoint::north(self.p.len())
        } else {
            SpherePoint(self.p.iter().map(|c| c / r).collect())
        }
    }

    /// Parameter of the inverse map: `phi_{P,t}^{-1} = phi_{-P,t}`.
    pub fn inverse(&self) -> Self {
        Self { p: self.p.iter().map(|c| -c).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.radius() == 0.0
    }
}

/// The dilation `phi_{P,t}` in closed form, with its conformal scale.
#[derive(Debug, Clone)]
pub struct ConformalMap {
    center: Vec<f64>,
    t: f64,
}

impl ConformalMap {
    pub fn new(p: &BallParam) -> Self {
        Self { center: p.center().into_vec(), t: p.t() }
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    fn denominator(&self, mu: f64) -> f64 {
        let t2 = self.t * self.t;
        t2 * (1.0 + mu) + (1.0 - mu)
    }

    /// `phi(x) = [2t (x - mu P) + (t^2(1+mu) - (1-mu)) P] / (t^2(1+mu) + 1 - mu)`, `mu = x.P`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let t = self.t;
        if t == 1.0 {
            return x.to_vec();
        }
        let mu = dot(x, &self.center);
        let d = self.denominator(mu);
        let along = t * t * (1.0 + mu) - (1.0 - mu);
        x.iter()
            .zip(&self.center)
            .map(|(xi, pi)| (2.0 * t * (xi - mu * pi) + along * pi) / d)
            .collect()
    }

    /// Conformal scale `rho = 2t / (t^2(1+mu) + 1 - mu)`.
    pub fn scale(&self, x: &[f64]) -> f64 {
        if self.t == 1.0 {
            return 1.0;
        }
        2.0 * self.t / self.denominator(dot(x, &self.center))
    }

    /// `|det d phi|(x) = rho(x)^n`.
    pub fn jacobian(&self, x: &[f64]) -> f64 {
        let n = (x.len() - 1) as i32;
        self.scale(x).powi(n)
    }

    /// Tangential gradient of `g o phi` at `x`, given the tangential gradient `grad`
    /// of `g` at `phi(x)`.
    pub fn pull_gradient(&self, x: &[f64], grad: &[f64]) -> Vec<f64> {
        let t = self.t;
        if t == 1.0 {
            return grad.to_vec();
        }
        let mu = dot(x, &self.center);
        let d = self.denominator(mu);
        let gp = dot(grad, &self.center) * (t - 1.0) * (t - 1.0);
        let w: Vec<f64> = grad
            .iter()
            .zip(&self.center)
            .map(|(g, p)| (2.0 * t * g + gp * p) / d)
            .collect();
        tangential(x, &w)
    }
}

/// Tangential projection `v - (v.x) x`.
pub fn tangential(x: &[f64], v: &[f64]) -> Vec<f64> {
    let s = dot(v, x);
    v.iter().zip(x).map(|(a, b)| a - s * b).collect()
}

pub fn conformal_map(p: &BallParam, x: &[f64]) -> Vec<f64> {
    ConformalMap::new(p).apply(x)
}

pub fn conformal_jacobian(p: &BallParam, x: &[f64]) -> f64 {
    ConformalMap::new(p).jacobian(x)
}

/// Weighted pullback `T_phi u = (u o phi) |det d phi|^{(n-4)/(2n)}`.
pub fn pullback_t<'a, F>(p: &BallParam, u: F) -> impl Fn(&[f64]) -> f64 + 'a
where
    F: Fn(&[f64]) -> f64 + 'a,
{
    let map = ConformalMap::new(p);
    move |x: &[f64]| {
        let n = (x.len() - 1) as f64;
        let e = (n - 4.0) / 2.0;
        u(&map.apply(x)) * map.scale(x).powf(e)
    }
}

/// First spherical harmonic `xi_j(x) = x_j`.
pub fn xi(x: &[f64], j: usize) -> f64 {
    x[j]
}

/// `grad xi_j = e_j - x_j x`.
pub fn grad_xi(x: &[f64], j: usize) -> Vec<f64> {
    let mut g: Vec<f64> = x.iter().map(|c| -x[j] * c).collect();
    g[j] += 1.0;
    g
}
