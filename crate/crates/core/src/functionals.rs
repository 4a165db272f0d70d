//! Paneitz energies, Sobolev quotients, the residual of the curvature equation
//! and the Kazdan-Warner moments.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fspec::FSpec;
use crate::geometry::{BallParam, ConformalMap};
use crate::reduction::optimizer::{ConstrainedProblem, OptimOptions};
use crate::spectral::{signed_pow, Backend, Field};

/// `E_a[u] = a (biharm + grad) + mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `avg (Delta u)^2`
    pub biharm: f64,
    /// `c_n avg |grad u|^2`
    pub grad: f64,
    /// `d_n avg u^2`
    pub mass: f64,
}

impl EnergyBreakdown {
    pub fn total(&self, a: f64) -> f64 {
        a * (self.biharm + self.grad) + self.mass
    }
}

pub fn energy(u: &Field) -> EnergyBreakdown {
    let dim = u.backend().dim();
    let (l2, grad, lap) = u.inner_products(u);
    EnergyBreakdown { biharm: lap, grad: dim.c_n * grad, mass: dim.d_n * l2 }
}

/// `avg |u|^q`, by quadrature on the nodes.
pub fn lq_power(u: &Field, q: f64) -> f64 {
    u.backend().integrate(&u.values().iter().map(|v| v.abs().powf(q)).collect::<Vec<_>>())
}

/// `J_{a,q}[u] = E_a[u] / (avg |u|^q)^{2/q}`.
pub fn quotient_jaq(u: &Field, a: f64, q: f64) -> Result<f64> {
    let denom = lq_power(u, q);
    if denom < 1e-14 {
        return Err(Error::Degenerate(format!("avg |u|^q = {denom:.3e}")));
    }
    Ok(energy(u).total(a) / denom.powf(2.0 / q))
}

/// The axisymmetric backend only represents `f_p` faithfully when `f` shares its axis.
pub fn check_compatible(backend: &dyn Backend, f: &FSpec) -> Result<()> {
    if f.n_ambient() != backend.dim().ambient() {
        return Err(Error::InvalidArgument(format!(
            "f lives in R^{}, backend in R^{}",
            f.n_ambient(),
            backend.dim().ambient()
        )));
    }
    if let Some(axis) = backend.symmetry_axis() {
        if !f.is_axisymmetric(axis) {
            return Err(Error::InvalidArgument(format!(
                "f is not axisymmetric about e_{} as the backend requires",
                axis + 1
            )));
        }
    }
    Ok(())
}

/// Nodal values of `f_p = f o phi_p` (orbit-averaged on axisymmetric grids).
pub fn shifted_values(backend: &dyn Backend, p: &BallParam, f: &FSpec) -> Vec<f64> {
    let map = ConformalMap::new(p);
    (0..backend.n_nodes())
        .map(|k| backend.orbit_average(k, &mut |x: &[f64]| f.eval(&map.apply(x))))
        .collect()
}

/// `Jbar_p[u] = E_1[u] / (avg f_p |u|^{2#})^{2/2#}`.
pub fn quotient_jbar(u: &Field, p: &BallParam, f: &FSpec) -> Result<f64> {
    let b = u.backend();
    check_compatible(b.as_ref(), f)?;
    let q = b.dim().two_sharp;
    let fp = shifted_values(b.as_ref(), p, f);
    let dens: Vec<f64> = u.values().iter().zip(&fp).map(|(v, w)| w * v.abs().powf(q)).collect();
    let denom = b.integrate(&dens);
    if denom <= 0.0 {
        return Err(Error::NonPositive(denom));
    }
    Ok(energy(u).total(1.0) / denom.powf(2.0 / q))
}

/// Nodal residual of `P u = (n-4)/2 f |u|^{2#-2} u`.
#[derive(Debug, Clone)]
pub struct PdeResidual {
    pub values: Vec<f64>,
    pub sup: f64,
    pub l2: f64,
}

pub fn pde_residual(u: &Field, f: &FSpec) -> PdeResidual {
    let b = u.backend();
    let dim = b.dim();
    let pu = u.paneitz(1.0);
    let pu = pu.values();
    let kappa = (dim.n as f64 - 4.0) / 2.0;
    let fv = shifted_values(b.as_ref(), &BallParam::origin(dim.ambient()), f);
    let values: Vec<f64> = pu
        .iter()
        .zip(u.values())
        .zip(&fv)
        .map(|((pv, uv), fk)| pv - kappa * fk * signed_pow(*uv, dim.two_sharp - 1.0))
        .collect();
    let sup = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let l2 = b.integrate(&values.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
    PdeResidual { values, sup, l2 }
}

/// `avg <g, grad xi_j> |u|^{2#}` for a tangential vector field `g`, all `j`.
pub fn gradient_moments(u: &Field, g: &(dyn Fn(&[f64]) -> Vec<f64> + Sync)) -> Vec<f64> {
    let b = u.backend();
    let m = b.dim().ambient();
    let q = b.dim().two_sharp;
    let mut out = vec![0.0; m];
    for (k, (&w, &uk)) in b.weights().iter().zip(u.values()).enumerate() {
        let mass = w * uk.abs().powf(q);
        for (j, o) in out.iter_mut().enumerate() {
            // g is tangential, so <g, e_j - x_j x> = g_j.
            *o += mass * b.orbit_average(k, &mut |x: &[f64]| g(x)[j]);
        }
    }
    out
}

/// Kazdan-Warner moments `avg <grad f, grad xi_j> |u|^{2#}`; they vanish on exact solutions.
pub fn kw_residual(u: &Field, f: &FSpec) -> Vec<f64> {
    gradient_moments(u, &|x: &[f64]| f.grad_sphere(x))
}

/// One start of the improved-inequality probe.
#[derive(Debug, Clone)]
pub struct ProbeStart {
    pub value: f64,
    pub converged: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct AubinProbe {
    pub a: f64,
    pub q: f64,
    /// Smallest quotient over feasible end points.
    pub best: f64,
    pub best_coeffs: Vec<f64>,
    pub starts: Vec<ProbeStart>,
}

/// Multistart minimization of `J_{a,q}` over `{avg |u|^q xi_j = 0}`. One-sided:
/// it can exhibit a violation of the lower bound `d_n`, never prove it.
pub fn aubin_probe(backend: &Arc<dyn Backend>, a: f64, q: f64, starts: usize, seed: u64) -> Result<AubinProbe> {
    let dim = backend.dim();
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument(format!("a = {a} must lie in (0, 1]")));
    }
    if !(q > 2.0 && q <= dim.two_sharp + 1e-12) {
        return Err(Error::InvalidArgument(format!("q = {q} must lie in (2, 2#]")));
    }
    let symbol: Vec<f64> = backend.degrees().iter().map(|&k| dim.paneitz_symbol(k, a)).collect();
    let problem = ConstrainedProblem::new(backend.as_ref(), symbol, vec![1.0; backend.n_nodes()], q);
    let opts = OptimOptions::default();
    let results: Vec<(ProbeStart, Vec<f64>)> = (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let start = random_start(backend.as_ref(), &mut rng, if i == 0 { 0.0 } else { 0.5 });
            let (coeffs, converged) = match problem.solve(&start, &opts) {
                Ok(r) => (r.coeffs, true),
                Err(Error::NoConvergence { best, .. }) => (best, false),
                Err(_) => (start, false),
            };
            let u = Field::from_coeffs(backend, coeffs.clone());
            let denom = lq_power(&u, q);
            let moments = xi_moments(&problem, &u, q);
            let feasible = (denom - 1.0).abs() < 1e-6 && moments < 1e-6;
            let value = quotient_jaq(&u, a, q).unwrap_or(f64::INFINITY);
            (ProbeStart { value, converged, feasible }, coeffs)
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut best_coeffs = Vec::new();
    for (s, c) in &results {
        if s.feasible && s.value < best {
            best = s.value;
            best_coeffs = c.clone();
        }
    }
    Ok(AubinProbe { a, q, best, best_coeffs, starts: results.into_iter().map(|r| r.0).collect() })
}

fn xi_moments(problem: &ConstrainedProblem<'_>, u: &Field, q: f64) -> f64 {
    let b = u.backend();
    problem
        .xi_columns()
        .iter()
        .map(|col| {
            let v: Vec<f64> = u.values().iter().zip(col).map(|(x, c)| x.abs().powf(q) * c).collect();
            b.integrate(&v).abs()
        })
        .fold(0.0, f64::max)
}

/// `1 + sigma * (random band-limited field)`, with amplitudes decaying in degree.
pub fn random_start(backend: &dyn Backend, rng: &mut ChaCha8Rng, sigma: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    backend
        .degrees()
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let base = if i == 0 { 1.0 } else { 0.0 };
            base + sigma * normal.sample(rng) / (1.0 + k as f64).powi(2)
        })
        .collect()
}
