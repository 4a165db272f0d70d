use nalgebra::DMatrix;

use super::quadrature::{gegenbauer_orthonormal, GridKind, QuadratureGrid};
use super::{check_gram, Backend};
use crate::error::{Error, Result};
use crate::geometry::Dimension;

/// Zonal harmonics about `e_axis`: normalized Gegenbauer polynomials
/// `C_k^{(n-1)/2}(mu)`, `k = 0..=L`.
#[derive(Debug, Clone)]
pub struct AxisymBackend {
    dim: Dimension,
    grid: QuadratureGrid,
    axis: usize,
    l: usize,
    alpha: f64,
    degrees: Vec<usize>,
    basis: DMatrix<f64>,
    orbits: Vec<f64>,
}

impl AxisymBackend {
    pub fn new(dim: &Dimension, grid: QuadratureGrid, l: usize) -> Result<Self> {
        let axis = match grid.kind {
            GridKind::Axisymmetric { axis } => axis,
            GridKind::Full => {
                return Err(Error::InvalidArgument("axisymmetric backend needs an axisymmetric grid".into()))
            }
        };
        let k = grid.len();
        let m = dim.ambient();
        let alpha = (dim.n as f64 - 2.0) / 2.0;
        let mut basis = DMatrix::zeros(k, l + 1);
        for (i, &mu) in grid.mu.iter().enumerate() {
            for (j, v) in gegenbauer_orthonormal(l, alpha, mu).into_iter().enumerate() {
                basis[(i, j)] = v;
            }
        }
        let mut orbits = Vec::with_capacity(k * 2 * dim.n * m);
        for &mu in &grid.mu {
            let r = (1.0 - mu * mu).max(0.0).sqrt();
            for i in (0..m).filter(|&i| i != axis) {
                for s in [1.0, -1.0] {
                    let mut x = vec![0.0; m];
                    x[axis] = mu;
                    x[i] = s * r;
                    orbits.extend_from_slice(&x);
                }
            }
        }
        let b = Self {
            dim: dim.clone(),
            grid,
            axis,
            l,
            alpha,
            degrees: (0..=l).collect(),
            basis,
            orbits,
        };
        check_gram(&b)?;
        Ok(b)
    }

    pub fn axis(&self) -> usize {
        self.axis
    }
}

impl Backend for AxisymBackend {
    fn name(&self) -> &'static str {
        "axisym"
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
        gegenbauer_orthonormal(self.l, self.alpha, x[self.axis].clamp(-1.0, 1.0))
    }

    fn orbit(&self, k: usize) -> &[f64] {
        let len = 2 * self.dim.n * self.dim.ambient();
        &self.orbits[k * len..(k + 1) * len]
    }

    fn symmetry_axis(&self) -> Option<usize> {
        Some(self.axis)
    }
}
