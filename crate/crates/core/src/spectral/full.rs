use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::quadrature::{GridKind, QuadratureGrid};
use super::{check_gram, Backend};
use crate::error::{Error, Result};
use crate::geometry::{sphere_moment, Dimension};

/// All exponent vectors in `m` variables with total degree `k`.
pub fn monomials(m: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(m: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == m - 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=k).rev() {
            prefix.push(e);
            rec(m, k - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, &mut Vec::with_capacity(m), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

/// Dimension of the degree-`k` harmonics on `S^{m-1}`.
pub fn harmonic_dimension(m: usize, k: usize) -> usize {
    let a = binomial(m + k - 1, k);
    let b = if k >= 2 { binomial(m + k - 3, k - 2) } else { 0 };
    a - b
}

fn add(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Restrictions of harmonic polynomials of degree `<= L`, orthonormalized with
/// exact sphere moments (independently of the quadrature, so the Gram check is a
/// genuine test of grid exactness).
#[derive(Debug, Clone)]
pub struct FullBackend {
    dim: Dimension,
    grid: QuadratureGrid,
    l: usize,
    degrees: Vec<usize>,
    monomials: Vec<Vec<u32>>,
    /// `n_monomials x n_modes`
    coeffs: DMatrix<f64>,
    basis: DMatrix<f64>,
}

impl FullBackend {
    pub fn new(dim: &Dimension, grid: QuadratureGrid, l: usize) -> Result<Self> {
        if grid.kind != GridKind::Full {
            return Err(Error::InvalidArgument("full backend needs a full grid".into()));
        }
        let m = dim.ambient();
        let n = dim.n;
        let mut all: Vec<Vec<u32>> = Vec::new();
        for k in 0..=l as u32 {
            all.extend(monomials(m, k));
        }
        let index: HashMap<Vec<u32>, usize> =
            all.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        let mut degrees = Vec::new();
        for k in 0..=l {
            let a = monomials(m, k as u32);
            let b = if k >= 2 { monomials(m, k as u32 - 2) } else { Vec::new() };
            let gaa = DMatrix::from_fn(a.len(), a.len(), |i, j| sphere_moment(n, &add(&a[i], &a[j])));
            let (q, x) = if b.is_empty() {
                (gaa, None)
            } else {
                let gbb = DMatrix::from_fn(b.len(), b.len(), |i, j| sphere_moment(n, &add(&b[i], &b[j])));
                let gba = DMatrix::from_fn(b.len(), a.len(), |i, j| sphere_moment(n, &add(&b[i], &a[j])));
                let chol = gbb
                    .cholesky()
                    .ok_or_else(|| Error::Quadrature("moment matrix not positive definite".into()))?;
                let x = chol.solve(&gba);
                (&gaa - gba.transpose() * &x, Some(x))
            };
            let eig = SymmetricEigen::new(q);
            let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let mut picked: Vec<usize> =
                (0..a.len()).filter(|&i| eig.eigenvalues[i] > 1e-10 * max).collect();
            picked.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
            let expected = harmonic_dimension(m, k);
            if picked.len() != expected {
                return Err(Error::Quadrature(format!(
                    "degree {k}: found {} harmonics, expected {expected}",
                    picked.len()
                )));
            }
            for i in picked {
                let lam = eig.eigenvalues[i];
                let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().map(|c| c / lam.sqrt()).collect();
                let lead = v.iter().cloned().find(|c| c.abs() > 1e-9).unwrap_or(1.0);
                if lead < 0.0 {
                    v.iter_mut().for_each(|c| *c = -*c);
                }
                let mut col = vec![0.0; all.len()];
                for (ai, e) in a.iter().enumerate() {
                    col[index[e]] += v[ai];
                }
                if let Some(x) = &x {
                    for (bi, e) in b.iter().enumerate() {
                        let s: f64 = (0..a.len()).map(|ai| x[(bi, ai)] * v[ai]).sum();
                        col[index[e]] -= s;
                    }
                }
                columns.push(col);
                degrees.push(k);
            }
        }
        let coeffs = DMatrix::from_fn(all.len(), columns.len(), |i, j| columns[j][i]);
        let mut basis = DMatrix::zeros(grid.len(), columns.len());
        const CHUNK: usize = 2048;
        for start in (0..grid.len()).step_by(CHUNK) {
            let rows = CHUNK.min(grid.len() - start);
            let mut mv = DMatrix::zeros(rows, all.len());
            for r in 0..rows {
                for (i, v) in monomial_values(&all, grid.node(start + r)).into_iter().enumerate() {
                    mv[(r, i)] = v;
                }
            }
            basis.rows_mut(start, rows).copy_from(&(mv * &coeffs));
        }
        let b = Self { dim: dim.clone(), grid, l, degrees, monomials: all, coeffs, basis };
        check_gram(&b)?;
        Ok(b)
    }
}

fn monomial_values(mons: &[Vec<u32>], x: &[f64]) -> Vec<f64> {
    mons.iter()
        .map(|e| e.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product())
        .collect()
}

impl Backend for FullBackend {
    fn name(&self) -> &'static str {
        "full"
    }

    fn dim(&self) -> &Dimension {
        &self.dim
    }

    fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    fn band_limit(&self) -> usize {
        self.l
    }

    fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    fn eval_basis(&self, x: &[f64]) -> Vec<f64> {
        let mv = monomial_values(&self.monomials, x);
        (0..self.coeffs.ncols())
            .map(|j| (0..mv.len()).map(|i| mv[i] * self.coeffs[(i, j)]).sum())
            .collect()
    }

    fn orbit(&self, k: usize) -> &[f64] {
        self.grid.node(k)
    }

    fn symmetry_axis(&self) -> Option<usize> {
        None
    }
}
