//! Band-limited fields on S^n: quadrature grids, orthonormal harmonic bases,
//! analysis/synthesis and spectral application of the Laplacian and Paneitz operator.

mod axisym;
mod field;
mod full;
pub mod quadrature;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use axisym::AxisymBackend;
pub use field::{analyze, signed_pow, synthesize, Field, PointwiseOp};
pub use full::FullBackend;
pub use quadrature::{
    gauss_gegenbauer, make_axisym_grid, make_axisym_grid_about, make_full_grid,
    make_full_grid_capped, GridKind, QuadratureGrid,
};

use crate::error::{Error, Result};
use crate::geometry::{BallParam, Dimension};

/// Largest `nodes x modes` basis table the full backend will allocate (about 400 MB).
pub const BASIS_ENTRY_CAP: usize = 50_000_000;

/// Maximum allowed deviation of the discrete Gram matrix from the identity.
pub const GRAM_TOLERANCE: f64 = 1e-8;

/// Common interface of the axisymmetric and full-sphere discretizations.
///
/// A backend owns a quadrature grid and an orthonormal basis of harmonics of
/// degree at most `L`, sampled at the nodes. Everything downstream (energies,
/// the constrained solver, multipliers) is written against this trait.
pub trait Backend: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &'static str;
    fn dim(&self) -> &Dimension;
    fn grid(&self) -> &QuadratureGrid;
    fn band_limit(&self) -> usize;
    /// Harmonic degree of each basis function.
    fn degrees(&self) -> &[usize];
    /// Basis sampled at the nodes, `n_nodes x n_modes`.
    fn basis(&self) -> &DMatrix<f64>;
    /// Basis evaluated at an arbitrary point of the sphere.
    fn eval_basis(&self, x: &[f64]) -> Vec<f64>;
    /// Equal-weight points whose average reproduces the orbit average at node `k`
    /// for polynomials of degree <= 3 in the coordinates transverse to the axis.
    fn orbit(&self, k: usize) -> &[f64];
    /// Symmetry axis, if functions are restricted to be axisymmetric.
    fn symmetry_axis(&self) -> Option<usize>;

    fn n_nodes(&self) -> usize {
        self.grid().len()
    }

    fn n_modes(&self) -> usize {
        self.degrees().len()
    }

    fn weights(&self) -> &[f64] {
        &self.grid().weights
    }

    fn node(&self, k: usize) -> &[f64] {
        self.grid().node(k)
    }

    fn integrate(&self, values: &[f64]) -> f64 {
        self.grid().integrate(values)
    }

    /// Orthogonal projection of nodal values onto the band-limited basis.
    fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let wv = DVector::from_iterator(
            values.len(),
            self.weights().iter().zip(values).map(|(w, v)| w * v),
        );
        self.basis().tr_mul(&wv).iter().copied().collect()
    }

    fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        (self.basis() * DVector::from_column_slice(coeffs)).iter().copied().collect()
    }

    /// Orbit average of `g` at node `k`.
    fn orbit_average(&self, k: usize, g: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
        let m = self.dim().ambient();
        let pts = self.orbit(k);
        let count = pts.len() / m;
        (0..count).map(|i| g(&pts[i * m..(i + 1) * m])).sum::<f64>() / count as f64
    }

    /// Indices `j` for which `xi_j` is not identically zero on this backend's function class.
    fn active_xi(&self) -> Vec<usize> {
        match self.symmetry_axis() {
            Some(a) => vec![a],
            None => (0..self.dim().ambient()).collect(),
        }
    }

    /// Whether the dilation with parameter `p` preserves the backend's function class.
    fn supports_center(&self, p: &BallParam) -> bool {
        match self.symmetry_axis() {
            None => true,
            Some(a) => p.coords().iter().enumerate().all(|(i, c)| i == a || *c == 0.0),
        }
    }

    fn check_center(&self, p: &BallParam) -> Result<()> {
        if self.supports_center(p) {
            Ok(())
        } else {
            Err(Error::UnsupportedCenter { backend: self.name(), center: p.coords().to_vec() })
        }
    }

    /// Largest dilation `t` the band limit resolves: `c * L`.
    fn resolution_bound(&self, c: f64) -> f64 {
        c * self.band_limit() as f64
    }

    /// Max-norm deviation of the discrete Gram matrix `B^T W B` from the identity.
    fn gram_deviation(&self) -> f64 {
        let b = self.basis();
        let w = self.weights();
        let mut wb = b.clone();
        for (k, &wk) in w.iter().enumerate() {
            wb.row_mut(k).scale_mut(wk);
        }
        let g = b.transpose() * wb;
        let mut dev: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((g[(i, j)] - target).abs());
            }
        }
        dev
    }
}

/// Verify the Gram matrix; used by backend constructors.
pub(crate) fn check_gram(b: &dyn Backend) -> Result<()> {
    let dev = b.gram_deviation();
    if dev > GRAM_TOLERANCE {
        Err(Error::GramDeviation(dev))
    } else {
        Ok(())
    }
}

/// Grid sizing for energy integrals of band-`L` fields raised to the power `2#`:
/// the smallest axisymmetric node count integrating degree `ceil(2#) L + 2` exactly.
pub fn axisym_nodes_for(dim: &Dimension, l: usize) -> usize {
    let r = dim.two_sharp.ceil() as usize;
    ((r * l + 3) / 2).max(l + 2).max(4)
}

/// Axisymmetric backend about `e_axis` with `k` nodes and band limit `l`.
pub fn axisym_backend(dim: &Dimension, k: usize, l: usize, axis: usize) -> Result<Arc<dyn Backend>> {
    let grid = make_axisym_grid_about(dim, k, axis)?;
    Ok(Arc::new(AxisymBackend::new(dim, grid, l)?))
}

/// Full-sphere backend with band limit `l` on a grid exact to degree `2 ceil(oversample l)`.
/// The node cap is lowered so that the sampled basis stays below [`BASIS_ENTRY_CAP`] entries.
pub fn full_backend(dim: &Dimension, l: usize, oversample: f64) -> Result<Arc<dyn Backend>> {
    let modes: usize = (0..=l).map(|k| full::harmonic_dimension(dim.ambient(), k)).sum();
    let cap = quadrature::DEFAULT_NODE_CAP.min(BASIS_ENTRY_CAP / modes.max(1));
    let grid = make_full_grid_capped(dim, l, oversample, cap)?;
    Ok(Arc::new(FullBackend::new(dim, grid, l)?))
}
