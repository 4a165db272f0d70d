//! Prescribed curvature functions, given as polynomials in the ambient
//! coordinates `x_1 .. x_{n+1}` and restricted to the sphere.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, sphere_moment, tangential, Dimension, Frame};

/// One monomial `coeff * x^exps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exps: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FSpec {
    n_ambient: usize,
    terms: Vec<Term>,
    degree: usize,
}

impl FSpec {
    pub fn new(n_ambient: usize, terms: Vec<Term>) -> Result<Self> {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for t in terms {
            if t.exps.len() != n_ambient {
                return Err(Error::InvalidArgument(format!(
                    "monomial has {} exponents, expected {n_ambient}",
                    t.exps.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
            *acc.entry(t.exps).or_insert(0.0) += t.coeff;
        }
        Ok(Self::from_map(n_ambient, acc))
    }

    fn from_map(n_ambient: usize, acc: BTreeMap<Vec<u32>, f64>) -> Self {
        let terms: Vec<Term> = acc
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(exps, coeff)| Term { exps, coeff })
            .collect();
        let degree = terms
            .iter()
            .map(|t| t.exps.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0);
        Self { n_ambient, terms, degree }
    }

    pub fn constant(n_ambient: usize, c: f64) -> Self {
        Self::from_map(n_ambient, BTreeMap::from([(vec![0; n_ambient], c)]))
    }

    /// `f0 (1 + eps xi_j)`: the Kazdan-Warner obstructed family.
    pub fn kw_family(dim: &Dimension, eps: f64, j: usize) -> Self {
        let m = dim.ambient();
        let mut e = vec![0; m];
        e[j] = 1;
        Self::from_map(m, BTreeMap::from([(vec![0; m], dim.f0), (e, dim.f0 * eps)]))
    }

    /// `f0 (1 + eps (x_a^2 - 1/(n+1)))`, axisymmetric about `e_a`.
    pub fn axisym_quadratic(dim: &Dimension, eps: f64, axis: usize) -> Self {
        let m = dim.ambient();
        let mut e = vec![0; m];
        e[axis] = 2;
        let c0 = dim.f0 * (1.0 - eps / m as f64);
        Self::from_map(m, BTreeMap::from([(vec![0; m], c0), (e, dim.f0 * eps)]))
    }

    /// `f0 (1 + eps sum_i a_i x_i^2)`.
    pub fn quadratic(dim: &Dimension, eps: f64, a: &[f64]) -> Result<Self> {
        let m = dim.ambient();
        if a.len() != m {
            return Err(Error::InvalidArgument(format!("need {m} quadratic weights")));
        }
        let mut acc = BTreeMap::from([(vec![0; m], dim.f0)]);
        for (i, ai) in a.iter().enumerate() {
            let mut e = vec![0; m];
            e[i] = 2;
            acc.insert(e, dim.f0 * eps * ai);
        }
        Ok(Self::from_map(m, acc))
    }

    /// Quadratic weights `a_i = (i +- 0.2)/(n+1) - 1/2`, `+` for even `i`: distinct and
    /// away from their mean, so the critical points are exactly `+-e_i` with `Delta_h f != 0`.
    pub fn generic_weights(m: usize) -> Vec<f64> {
        (0..m)
            .map(|i| (i as f64 + if i % 2 == 0 { 0.2 } else { -0.2 }) / m as f64 - 0.5)
            .collect()
    }

    /// `f0 (1 + eps Z_3(x_a))` with the zonal cubic harmonic `Z_3(mu) = mu^3 - 3 mu/(n+3)`.
    pub fn zonal_cubic(dim: &Dimension, eps: f64, axis: usize) -> Self {
        let m = dim.ambient();
        let mut e3 = vec![0; m];
        e3[axis] = 3;
        let mut e1 = vec![0; m];
        e1[axis] = 1;
        let k = 3.0 / (dim.n as f64 + 3.0);
        Self::from_map(
            m,
            BTreeMap::from([(vec![0; m], dim.f0), (e3, dim.f0 * eps), (e1, -dim.f0 * eps * k)]),
        )
    }

    pub fn n_ambient(&self) -> usize {
        self.n_ambient
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.exps.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Ambient gradient of the polynomial.
    pub fn grad_ambient(&self, x: &[f64]) -> Vec<f64> {
        let m = self.n_ambient;
        let mut g = vec![0.0; m];
        for t in &self.terms {
            for k in 0..m {
                if t.exps[k] == 0 {
                    continue;
                }
                let mut v = t.coeff * t.exps[k] as f64;
                for (i, (&e, &xi)) in t.exps.iter().zip(x).enumerate() {
                    let e = if i == k { e - 1 } else { e };
                    v *= xi.powi(e as i32);
                }
                g[k] += v;
            }
        }
        g
    }

    /// Ambient Hessian, row-major.
    pub fn hess_ambient(&self, x: &[f64]) -> Vec<f64> {
        let m = self.n_ambient;
        let mut h = vec![0.0; m * m];
        for t in &self.terms {
            for a in 0..m {
                for b in a..m {
                    let mut ex = t.exps.clone();
                    let mut c = t.coeff;
                    if ex[a] == 0 {
                        continue;
                    }
                    c *= ex[a] as f64;
                    ex[a] -= 1;
                    if ex[b] == 0 {
                        continue;
                    }
                    c *= ex[b] as f64;
                    ex[b] -= 1;
                    let v = c * ex.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>();
                    h[a * m + b] += v;
                    if a != b {
                        h[b * m + a] += v;
                    }
                }
            }
        }
        h
    }

    /// Tangential (spherical) gradient at `x` on the sphere.
    pub fn grad_sphere(&self, x: &[f64]) -> Vec<f64> {
        tangential(x, &self.grad_ambient(x))
    }

    /// Laplace-Beltrami of the restriction, geometer's sign (`Delta_h xi = n xi`):
    /// `-(tr D^2 F - x^T D^2 F x - n x.DF)`.
    pub fn laplacian_h(&self, x: &[f64]) -> f64 {
        let m = self.n_ambient;
        let h = self.hess_ambient(x);
        let g = self.grad_ambient(x);
        let tr: f64 = (0..m).map(|i| h[i * m + i]).sum();
        let mut xhx = 0.0;
        for a in 0..m {
            for b in 0..m {
                xhx += x[a] * h[a * m + b] * x[b];
            }
        }
        -(tr - xhx - (m - 1) as f64 * dot(x, &g))
    }

    fn mul(a: &BTreeMap<Vec<u32>, f64>, b: &BTreeMap<Vec<u32>, f64>) -> BTreeMap<Vec<u32>, f64> {
        let mut out = BTreeMap::new();
        for (ea, ca) in a {
            for (eb, cb) in b {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *out.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out
    }

    /// The polynomial `z -> f(H z)` for the reflection frame `H`.
    pub fn compose_frame(&self, frame: &Frame) -> Self {
        let m = self.n_ambient;
        // Row i of H as a linear polynomial in z.
        let cols: Vec<Vec<f64>> = (0..m).map(|k| frame.column(k)).collect();
        let rows: Vec<BTreeMap<Vec<u32>, f64>> = (0..m)
            .map(|i| {
                let mut p = BTreeMap::new();
                for (k, col) in cols.iter().enumerate() {
                    if col[i] != 0.0 {
                        let mut e = vec![0; m];
                        e[k] = 1;
                        p.insert(e, col[i]);
                    }
                }
                p
            })
            .collect();
        let one = BTreeMap::from([(vec![0; m], 1.0)]);
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for t in &self.terms {
            let mut prod = one.clone();
            for (i, &e) in t.exps.iter().enumerate() {
                for _ in 0..e {
                    prod = Self::mul(&prod, &rows[i]);
                }
            }
            for (e, c) in prod {
                *acc.entry(e).or_insert(0.0) += t.coeff * c;
            }
        }
        acc.retain(|_, c| c.abs() > 1e-15);
        Self::from_map(m, acc)
    }

    /// Exact decomposition into mean, first-harmonic coefficients `h` (with
    /// `f = mean + sum h_j x_j + rest`) and the L2 norm of the rest.
    pub fn harmonic_split(&self) -> (f64, Vec<f64>, f64) {
        let m = self.n_ambient;
        let n = m - 1;
        let mean: f64 = self.terms.iter().map(|t| t.coeff * sphere_moment(n, &t.exps)).sum();
        let h: Vec<f64> = (0..m)
            .map(|j| {
                m as f64
                    * self
                        .terms
                        .iter()
                        .map(|t| {
                            let mut e = t.exps.clone();
                            e[j] += 1;
                            t.coeff * sphere_moment(n, &e)
                        })
                        .sum::<f64>()
            })
            .collect();
        let mut l2 = 0.0;
        for a in &self.terms {
            for b in &self.terms {
                let e: Vec<u32> = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
                l2 += a.coeff * b.coeff * sphere_moment(n, &e);
            }
        }
        let rest2 = l2 - mean * mean - h.iter().map(|v| v * v).sum::<f64>() / m as f64;
        (mean, h, rest2.max(0.0).sqrt())
    }

    /// Whether `f` depends only on `x_axis` on the sphere (checked at sample pairs
    /// related by rotations about the axis).
    pub fn is_axisymmetric(&self, axis: usize) -> bool {
        let m = self.n_ambient;
        let scale = 1.0 + self.terms.iter().map(|t| t.coeff.abs()).sum::<f64>();
        for s in 0..7 {
            let mu = -0.9 + 0.27 * s as f64;
            let r = (1.0 - mu * mu).sqrt();
            let mut base = vec![0.0; m];
            base[axis] = mu;
            let others: Vec<usize> = (0..m).filter(|&i| i != axis).collect();
            let mut x0 = base.clone();
            x0[others[0]] = r;
            let v0 = self.eval(&x0);
            for k in 0..3 {
                let mut x = base.clone();
                // a generic direction in the orthogonal complement
                let w: Vec<f64> = (0..others.len())
                    .map(|l| ((l * 7 + k * 3 + s) as f64 * 0.731).sin() + 0.1)
                    .collect();
                let wn = w.iter().map(|a| a * a).sum::<f64>().sqrt();
                for (l, &o) in others.iter().enumerate() {
                    x[o] = r * w[l] / wn;
                }
                if (self.eval(&x) - v0).abs() > 1e-12 * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Polynomial in `z` restricted to the sphere, shifted by a constant.
    pub fn add_constant(&self, c: f64) -> Self {
        let mut acc: BTreeMap<Vec<u32>, f64> =
            self.terms.iter().map(|t| (t.exps.clone(), t.coeff)).collect();
        *acc.entry(vec![0; self.n_ambient]).or_insert(0.0) += c;
        Self::from_map(self.n_ambient, acc)
    }
}
