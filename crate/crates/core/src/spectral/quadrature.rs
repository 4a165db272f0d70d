//! Gauss-Gegenbauer rules and quadrature grids on S^n.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::Dimension;

/// Default cap on the number of nodes of a full-sphere grid.
pub const DEFAULT_NODE_CAP: usize = 2_000_000;

/// Squared recurrence coefficient `beta_k` of the monic orthogonal polynomials for
/// the weight `(1 - mu^2)^alpha`.
fn beta(k: usize, alpha: f64) -> f64 {
    let k = k as f64;
    k * (k + 2.0 * alpha) / ((2.0 * k + 2.0 * alpha + 1.0) * (2.0 * k + 2.0 * alpha - 1.0))
}

/// Orthonormal polynomials `q_0 .. q_{deg}` for the normalized weight
/// `(1 - mu^2)^alpha`, evaluated at `mu`.
pub fn gegenbauer_orthonormal(deg: usize, alpha: f64, mu: f64) -> Vec<f64> {
    let mut q = Vec::with_capacity(deg + 1);
    q.push(1.0);
    if deg == 0 {
        return q;
    }
    let b1 = beta(1, alpha).sqrt();
    q.push(mu / b1);
    for k in 1..deg {
        let bk = beta(k, alpha).sqrt();
        let bk1 = beta(k + 1, alpha).sqrt();
        let next = (mu * q[k] - bk * q[k - 1]) / bk1;
        q.push(next);
    }
    q
}

/// `(q_K(mu), q_K'(mu))` by the three-term recurrence.
fn q_and_derivative(deg: usize, alpha: f64, mu: f64) -> (f64, f64) {
    let (mut p0, mut d0) = (1.0, 0.0);
    let b1 = beta(1, alpha).sqrt();
    let (mut p1, mut d1) = (mu / b1, 1.0 / b1);
    for k in 1..deg {
        let bk = beta(k, alpha).sqrt();
        let bk1 = beta(k + 1, alpha).sqrt();
        let p2 = (mu * p1 - bk * p0) / bk1;
        let d2 = (p1 + mu * d1 - bk * d0) / bk1;
        p0 = p1;
        d0 = d1;
        p1 = p2;
        d1 = d2;
    }
    (p1, d1)
}

/// Gauss rule with `k` nodes for the normalized weight `(1 - mu^2)^alpha` on `[-1, 1]`.
///
/// Golub-Welsch for initial nodes, Newton polishing on `q_k`, Christoffel weights.
/// Exact for polynomials of degree `2k - 1`; nodes are exactly antisymmetric.
pub fn gauss_gegenbauer(k: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 {
        return Err(Error::Quadrature("need at least one node".into()));
    }
    if k == 1 {
        return Ok((vec![0.0], vec![1.0]));
    }
    let mut jac = DMatrix::<f64>::zeros(k, k);
    for i in 1..k {
        let b = beta(i, alpha).sqrt();
        jac[(i - 1, i)] = b;
        jac[(i, i - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for x in nodes.iter_mut() {
        let mut converged = false;
        for _ in 0..20 {
            let (q, dq) = q_and_derivative(k, alpha, *x);
            let step = q / dq;
            *x -= step;
            if step.abs() < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged || !x.is_finite() || x.abs() >= 1.0 {
            return Err(Error::Quadrature(format!(
                "Newton refinement of node failed (k = {k}, alpha = {alpha})"
            )));
        }
    }
    for i in 0..k / 2 {
        let s = 0.5 * (nodes[k - 1 - i] - nodes[i]);
        nodes[i] = -s;
        nodes[k - 1 - i] = s;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let q = gegenbauer_orthonormal(k - 1, alpha, x);
            1.0 / q.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    for i in 0..k / 2 {
        let w = 0.5 * (weights[i] + weights[k - 1 - i]);
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Quadrature(format!("weights sum to {total}")));
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((nodes, weights))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Gauss rule in `mu = x_axis`; integrates functions of `mu` only.
    Axisymmetric { axis: usize },
    /// Product rule over hyperspherical angles.
    Full,
}

/// Nodes (ambient coordinates, flattened) and normalized weights.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub kind: GridKind,
    pub n_ambient: usize,
    /// Flattened node coordinates; for axisymmetric grids, one representative per latitude.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Latitudes `mu_k` (axisymmetric grids only).
    pub mu: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.n_ambient..(k + 1) * self.n_ambient]
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Axisymmetric grid about `e_{n+1}`.
pub fn make_axisym_grid(dim: &Dimension, k: usize) -> Result<QuadratureGrid> {
    make_axisym_grid_about(dim, k, dim.n)
}

/// Gauss-Jacobi nodes in `mu = x_axis` with weight `(1 - mu^2)^{(n-2)/2}`.
pub fn make_axisym_grid_about(dim: &Dimension, k: usize, axis: usize) -> Result<QuadratureGrid> {
    if k < 4 {
        return Err(Error::InvalidArgument(format!("axisymmetric grid needs K >= 4, got {k}")));
    }
    let m = dim.ambient();
    if axis >= m {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let alpha = (dim.n as f64 - 2.0) / 2.0;
    let (mu, weights) = gauss_gegenbauer(k, alpha)?;
    let side = if axis == 0 { 1 } else { 0 };
    let mut nodes = vec![0.0; k * m];
    for (i, &x) in mu.iter().enumerate() {
        nodes[i * m + axis] = x;
        nodes[i * m + side] = (1.0 - x * x).max(0.0).sqrt();
    }
    Ok(QuadratureGrid {
        kind: GridKind::Axisymmetric { axis },
        n_ambient: m,
        nodes,
        weights,
        mu,
        exactness_degree: 2 * k - 1,
    })
}

pub fn make_full_grid(dim: &Dimension, l: usize, oversample: f64) -> Result<QuadratureGrid> {
    make_full_grid_capped(dim, l, oversample, DEFAULT_NODE_CAP)
}

/// Product rule exact for polynomials of degree `2 ceil(oversample L)`.
pub fn make_full_grid_capped(
    dim: &Dimension,
    l: usize,
    oversample: f64,
    cap: usize,
) -> Result<QuadratureGrid> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("full grid needs L >= 2, got {l}")));
    }
    if !(oversample >= 1.0) {
        return Err(Error::InvalidArgument(format!("oversample {oversample} < 1")));
    }
    let degree = 2 * (oversample * l as f64).ceil() as usize;
    let n = dim.n;
    let lat = (degree + 2) / 2;
    let az = degree + 1;
    let count = (lat as f64).powi(n as i32 - 1) * az as f64;
    if count > cap as f64 {
        return Err(Error::NodeCap { nodes: count.min(usize::MAX as f64) as usize, cap });
    }
    // S^1
    let mut pts: Vec<Vec<f64>> = (0..az)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / az as f64;
            vec![th.cos(), th.sin()]
        })
        .collect();
    let mut wts = vec![1.0 / az as f64; az];
    for sphere_dim in 2..=n {
        let alpha = (sphere_dim as f64 - 2.0) / 2.0;
        let (mu, w) = gauss_gegenbauer(lat, alpha)?;
        let mut next_pts = Vec::with_capacity(pts.len() * lat);
        let mut next_w = Vec::with_capacity(pts.len() * lat);
        for (x, wx) in mu.iter().zip(&w) {
            let r = (1.0 - x * x).sqrt();
            for (p, wp) in pts.iter().zip(&wts) {
                let mut q: Vec<f64> = p.iter().map(|c| r * c).collect();
                q.push(*x);
                next_pts.push(q);
                next_w.push(wx * wp);
            }
        }
        pts = next_pts;
        wts = next_w;
    }
    Ok(QuadratureGrid {
        kind: GridKind::Full,
        n_ambient: n + 1,
        nodes: pts.into_iter().flatten().collect(),
        weights: wts,
        mu: Vec::new(),
        exactness_degree: degree,
    })
}
