use std::fmt;
use std::sync::{Arc, OnceLock};

use super::Backend;
use crate::error::{Error, Result};

/// `|x|^{q-1} x`, defined for every real `x` when `q > 1`.
pub fn signed_pow(x: f64, q: f64) -> f64 {
    x.abs().powf(q - 1.0) * x
}

/// Nodal operations available to [`Field::pointwise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointwiseOp {
    Add,
    Sub,
    Mul,
    SignedPow(f64),
    AbsPow(f64),
}

/// A band-limited function: spectral coefficients are authoritative, nodal values
/// are synthesized on first use and cached.
#[derive(Clone)]
pub struct Field {
    backend: Arc<dyn Backend>,
    coeffs: Vec<f64>,
    nodal: OnceLock<Vec<f64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("backend", &self.backend.name())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Field {
    pub fn from_coeffs(backend: &Arc<dyn Backend>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), backend.n_modes(), "coefficient count mismatch");
        Self { backend: Arc::clone(backend), coeffs, nodal: OnceLock::new() }
    }

    /// Projection of nodal data onto the band (truncation dealiasing).
    pub fn from_nodal(backend: &Arc<dyn Backend>, values: &[f64]) -> Self {
        Self::from_coeffs(backend, backend.analyze(values))
    }

    /// Projection of `g` sampled at the nodes.
    pub fn from_fn(backend: &Arc<dyn Backend>, g: impl Fn(&[f64]) -> f64) -> Self {
        let values: Vec<f64> = (0..backend.n_nodes()).map(|k| g(backend.node(k))).collect();
        Self::from_nodal(backend, &values)
    }

    pub fn constant(backend: &Arc<dyn Backend>, c: f64) -> Self {
        let mut coeffs = vec![0.0; backend.n_modes()];
        coeffs[0] = c;
        Self::from_coeffs(backend, coeffs)
    }

    pub fn backend(&self) -> &Arc<dyn Backend> {
        &self.backend
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn values(&self) -> &[f64] {
        self.nodal.get_or_init(|| self.backend.synthesize(&self.coeffs))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.backend.eval_basis(x).iter().zip(&self.coeffs).map(|(b, c)| b * c).sum()
    }

    /// Average over the sphere (the degree-0 coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_coeffs(&self.backend, self.coeffs.iter().map(|c| c * s).collect())
    }

    fn map_modes(&self, g: impl Fn(usize) -> f64) -> Self {
        let degrees = self.backend.degrees();
        let coeffs = self.coeffs.iter().zip(degrees).map(|(c, &k)| c * g(k)).collect();
        Self::from_coeffs(&self.backend, coeffs)
    }

    /// Geometer's Laplacian: degree-k coefficients scaled by `k(k+n-1)`.
    pub fn laplacian(&self) -> Self {
        let dim = self.backend.dim().clone();
        self.map_modes(|k| dim.lambda(k))
    }

    /// Weighted Paneitz operator `a(Delta^2 + c_n Delta) + d_n`.
    pub fn paneitz(&self, a: f64) -> Self {
        let dim = self.backend.dim().clone();
        self.map_modes(|k| dim.paneitz_symbol(k, a))
    }

    /// Nodal operation followed by projection back to the band.
    pub fn pointwise(&self, other: Option<&Field>, op: PointwiseOp) -> Result<Self> {
        let u = self.values();
        let values: Vec<f64> = match op {
            PointwiseOp::Add | PointwiseOp::Sub | PointwiseOp::Mul => {
                let v = other
                    .ok_or_else(|| Error::InvalidArgument("binary operation needs a second field".into()))?
                    .values();
                u.iter()
                    .zip(v)
                    .map(|(a, b)| match op {
                        PointwiseOp::Add => a + b,
                        PointwiseOp::Sub => a - b,
                        _ => a * b,
                    })
                    .collect()
            }
            PointwiseOp::SignedPow(q) => u.iter().map(|&a| signed_pow(a, q)).collect(),
            PointwiseOp::AbsPow(q) => {
                if q < 0.0 && u.iter().any(|&a| a == 0.0) {
                    return Err(Error::ZeroToNegativePower);
                }
                u.iter().map(|a| a.abs().powf(q)).collect()
            }
        };
        Ok(Self::from_nodal(&self.backend, &values))
    }

    /// `(avg u v, avg <grad u, grad v>, avg Delta u Delta v)`, computed spectrally.
    pub fn inner_products(&self, other: &Field) -> (f64, f64, f64) {
        let dim = self.backend.dim();
        let mut out = (0.0, 0.0, 0.0);
        for ((a, b), &k) in self.coeffs.iter().zip(&other.coeffs).zip(self.backend.degrees()) {
            let l = dim.lambda(k);
            out.0 += a * b;
            out.1 += l * a * b;
            out.2 += l * l * a * b;
        }
        out
    }

    /// `u = mean + sum_j h_j xi_j + psi` with `psi` orthogonal to constants and first harmonics.
    pub fn decompose(&self) -> (f64, Vec<f64>, Field) {
        let b = &self.backend;
        let m = b.dim().ambient();
        let u = self.values();
        let mut h = vec![0.0; m];
        for (k, (&w, &uk)) in b.weights().iter().zip(u).enumerate() {
            for (j, hj) in h.iter_mut().enumerate() {
                *hj += w * uk * b.orbit_average(k, &mut |x: &[f64]| x[j]);
            }
        }
        h.iter_mut().for_each(|v| *v *= m as f64);
        let psi = self.map_modes(|k| if k <= 1 { 0.0 } else { 1.0 });
        (self.mean(), h, psi)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn analyze(backend: &dyn Backend, values: &[f64]) -> Vec<f64> {
    backend.analyze(values)
}

pub fn synthesize(backend: &dyn Backend, coeffs: &[f64]) -> Vec<f64> {
    backend.synthesize(coeffs)
}
