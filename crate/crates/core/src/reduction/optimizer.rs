//! Augmented-Lagrangian solver for
//!
//! ```text
//! minimize   sum_m s_m c_m^2
//! subject to avg F |u|^q = 1,   avg |u|^q xi_j = 0
//! ```
//!
//! over the coefficients `c` of a band-limited field `u = B c`. Inner problems are
//! solved by damped Newton with a modified Cholesky factorization; the final
//! iterate is polished by Newton steps on the full KKT system.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::spectral::Backend;

#[derive(Debug, Clone)]
pub struct OptimOptions {
    /// Projected-gradient tolerance (relative to the energy gradient scale).
    pub tol: f64,
    /// Constraint tolerance.
    pub feas_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub rho0: f64,
    pub rho_factor: f64,
    pub rho_max: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            feas_tol: 1e-12,
            max_outer: 40,
            max_inner: 200,
            rho0: 10.0,
            rho_factor: 10.0,
            rho_max: 1e8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub coeffs: Vec<f64>,
    /// Multipliers of `[g_0, g_j...]` in `grad E = sum_i lambda_i grad g_i`.
    pub multipliers: Vec<f64>,
    pub energy: f64,
    /// `|grad E - J^T lambda|_inf` scaled by `1 + |grad E|_inf`.
    pub kkt_residual: f64,
    pub constraint_violation: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
}

/// Discretized constrained problem on a backend.
#[derive(Debug)]
pub struct ConstrainedProblem<'a> {
    backend: &'a dyn Backend,
    symbol: Vec<f64>,
    weight_fn: Vec<f64>,
    q: f64,
    xi_cols: Vec<Vec<f64>>,
}

struct Eval {
    u: DVector<f64>,
    g: DVector<f64>,
    jac: DMatrix<f64>,
}

impl<'a> ConstrainedProblem<'a> {
    /// `symbol[m]` weights the quadratic energy, `weight_fn` is `F` at the nodes.
    pub fn new(backend: &'a dyn Backend, symbol: Vec<f64>, weight_fn: Vec<f64>, q: f64) -> Self {
        let xi_cols = backend
            .active_xi()
            .into_iter()
            .map(|j| {
                (0..backend.n_nodes())
                    .map(|k| backend.orbit_average(k, &mut |x: &[f64]| x[j]))
                    .collect()
            })
            .collect();
        Self { backend, symbol, weight_fn, q, xi_cols }
    }

    pub fn n_constraints(&self) -> usize {
        1 + self.xi_cols.len()
    }

    pub fn energy(&self, c: &[f64]) -> f64 {
        c.iter().zip(&self.symbol).map(|(a, s)| s * a * a).sum()
    }

    fn eval(&self, c: &DVector<f64>) -> Eval {
        let b = self.backend.basis();
        let w = self.backend.weights();
        let u = b * c;
        let q = self.q;
        let nc = self.n_constraints();
        let mut g = DVector::zeros(nc);
        let mut dens = DMatrix::zeros(u.len(), nc);
        for k in 0..u.len() {
            let a = u[k].abs();
            let uq = a.powf(q);
            let d = w[k] * q * a.powf(q - 2.0) * u[k];
            g[0] += w[k] * self.weight_fn[k] * uq;
            dens[(k, 0)] = d * self.weight_fn[k];
            for (j, col) in self.xi_cols.iter().enumerate() {
                g[j + 1] += w[k] * col[k] * uq;
                dens[(k, j + 1)] = d * col[k];
            }
        }
        g[0] -= 1.0;
        let jac = dens.tr_mul(b);
        Eval { u, g, jac }
    }

    /// `sum_i mu_i Hess g_i`.
    fn constraint_hessian(&self, u: &DVector<f64>, mu: &DVector<f64>) -> DMatrix<f64> {
        let b = self.backend.basis();
        let w = self.backend.weights();
        let q = self.q;
        let mut scaled = b.clone();
        for k in 0..u.len() {
            let mut s = mu[0] * self.weight_fn[k];
            for (j, col) in self.xi_cols.iter().enumerate() {
                s += mu[j + 1] * col[k];
            }
            let d = w[k] * q * (q - 1.0) * u[k].abs().powf(q - 2.0) * s;
            scaled.row_mut(k).scale_mut(d);
        }
        scaled.tr_mul(b)
    }

    fn energy_grad(&self, c: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(c.len(), c.iter().zip(&self.symbol).map(|(a, s)| 2.0 * s * a))
    }

    fn lagrangian_hessian(&self, u: &DVector<f64>, lambda: &DVector<f64>) -> DMatrix<f64> {
        let mut h = -self.constraint_hessian(u, lambda);
        for (m, s) in self.symbol.iter().enumerate() {
            h[(m, m)] += 2.0 * s;
        }
        h
    }

    /// Least-squares multipliers when the start is nearly feasible; otherwise the
    /// homogeneity value `lambda_0 = 2E/q` (from `c . grad E = 2E`, `c . grad g_0 = q`)
    /// with zero balance multipliers, since least squares can then return `lambda_0 < 0`.
    fn initial_multipliers(&self, c: &DVector<f64>) -> DVector<f64> {
        let ev = self.eval(c);
        let ls = self.least_squares_multipliers(&ev, &self.energy_grad(c));
        if ev.g.amax() < 1e-3 && ls[0] > 0.0 {
            return ls;
        }
        let mut lambda = DVector::zeros(self.n_constraints());
        lambda[0] = 2.0 * self.energy(c.as_slice()) / self.q;
        lambda
    }

    fn least_squares_multipliers(&self, ev: &Eval, ge: &DVector<f64>) -> DVector<f64> {
        let jjt = &ev.jac * ev.jac.transpose();
        let rhs = &ev.jac * ge;
        jjt.clone()
            .cholesky()
            .map(|ch| ch.solve(&rhs))
            .or_else(|| jjt.lu().solve(&rhs))
            .unwrap_or_else(|| DVector::zeros(rhs.len()))
    }

    fn kkt(&self, c: &DVector<f64>, lambda: &DVector<f64>) -> (f64, f64) {
        let ev = self.eval(c);
        let ge = self.energy_grad(c);
        let r = &ge - ev.jac.transpose() * lambda;
        let scale = 1.0 + ge.amax();
        (r.amax() / scale, ev.g.amax())
    }

    /// Solve from `start`.
    pub fn solve(&self, start: &[f64], opts: &OptimOptions) -> Result<OptimResult> {
        let mut c = DVector::from_column_slice(start);
        // The normalization constraint is homogeneous: start on it. Far-off starts
        // otherwise let the penalty pull u towards 0, where the Jacobian vanishes.
        let mass = self.eval(&c).g[0] + 1.0;
        if mass > 0.0 && mass.is_finite() {
            c.scale_mut(mass.powf(-1.0 / self.q));
        }
        let mut lambda = self.initial_multipliers(&c);
        // Along the ray s u the merit is 2-homogeneous in E but degree q in g, so
        // a penalty small against E makes s -> 0 the cheaper branch.
        let mut rho = opts.rho0 * self.energy(c.as_slice()).max(1.0);
        let mut inner_total = 0;
        let mut outer = 0;
        let mut converged = false;
        let mut feas_prev = f64::INFINITY;
        while outer < opts.max_outer {
            outer += 1;
            // Inexact inner solves early on; the tolerance tightens with feasibility.
            let inner_tol = opts.tol.max(feas_prev.min(1e-3) * 0.1);
            let (_, its) = self.inner(&mut c, &lambda, rho, inner_tol, opts.max_inner);
            inner_total += its;
            let mut ev = self.eval(&c);
            if ev.g[0] < -0.999 {
                // Collapsed towards u = 0: restore the mass and stiffen the penalty.
                let mass = ev.g[0] + 1.0;
                if mass > 0.0 {
                    c.scale_mut(mass.powf(-1.0 / self.q));
                } else {
                    c = DVector::from_column_slice(start);
                }
                rho = (rho * opts.rho_factor).min(opts.rho_max);
                lambda = self.initial_multipliers(&c);
                feas_prev = f64::INFINITY;
                ev = self.eval(&c);
                if ev.g[0] < -0.999 {
                    continue;
                }
            }
            lambda -= ev.g.scale(rho);
            let (kkt, feas) = self.kkt(&c, &lambda);
            if feas < opts.feas_tol && kkt < opts.tol {
                converged = true;
                break;
            }
            // Near the solution KKT Newton converges quadratically.
            if feas < 1e-4 && self.polish(&mut c, &mut lambda, opts) {
                converged = true;
                break;
            }
            if feas > 0.25 * feas_prev {
                rho = (rho * opts.rho_factor).min(opts.rho_max);
            }
            feas_prev = feas;
        }
        if converged {
            self.polish(&mut c, &mut lambda, opts);
        }
        let (kkt, feas) = self.kkt(&c, &lambda);
        let coeffs: Vec<f64> = c.iter().copied().collect();
        if !converged || !coeffs.iter().all(|v| v.is_finite()) {
            return Err(Error::NoConvergence {
                iterations: outer,
                residual: kkt.max(feas),
                best: coeffs,
            });
        }
        Ok(OptimResult {
            energy: self.energy(&coeffs),
            coeffs,
            multipliers: lambda.iter().copied().collect(),
            kkt_residual: kkt,
            constraint_violation: feas,
            outer_iterations: outer,
            inner_iterations: inner_total,
            converged,
        })
    }

    fn merit(&self, c: &DVector<f64>, lambda: &DVector<f64>, rho: f64) -> f64 {
        let ev = self.eval(c);
        self.energy(c.as_slice()) - lambda.dot(&ev.g) + 0.5 * rho * ev.g.norm_squared()
    }

    /// Damped Newton on the augmented Lagrangian; returns (converged, iterations).
    fn inner(&self, c: &mut DVector<f64>, lambda: &DVector<f64>, rho: f64, tol: f64, max_iter: usize) -> (bool, usize) {
        for it in 0..max_iter {
            let ev = self.eval(c);
            let ge = self.energy_grad(c);
            let shifted = lambda - ev.g.scale(rho);
            let grad = &ge - ev.jac.transpose() * &shifted;
            let scale = 1.0 + ge.amax();
            if grad.amax() <= tol * scale {
                return (true, it);
            }
            let mut h = self.lagrangian_hessian(&ev.u, &shifted);
            h += ev.jac.transpose() * &ev.jac * rho;
            let dir = match modified_cholesky_solve(&h, &(-&grad)) {
                Some(d) => d,
                None => return (false, it),
            };
            let phi0 = self.merit(c, lambda, rho);
            let slope = grad.dot(&dir);
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial = &*c + dir.scale(step);
                let phi = self.merit(&trial, lambda, rho);
                if phi.is_finite() && phi <= phi0 + 1e-4 * step * slope {
                    *c = trial;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                // No decrease available at machine precision: stationary to roundoff.
                return (grad.amax() <= 1e3 * tol * scale, it);
            }
        }
        (false, max_iter)
    }

    /// Newton iterations on the KKT system; true if tolerances are met.
    fn polish(&self, c: &mut DVector<f64>, lambda: &mut DVector<f64>, opts: &OptimOptions) -> bool {
        let mut best = self.kkt(c, lambda);
        for _ in 0..8 {
            if best.0 < opts.tol && best.1 < opts.feas_tol {
                return true;
            }
            let ev = self.eval(c);
            let ge = self.energy_grad(c);
            let m = c.len();
            let nc = lambda.len();
            let w = self.lagrangian_hessian(&ev.u, lambda);
            let mut kmat = DMatrix::zeros(m + nc, m + nc);
            kmat.view_mut((0, 0), (m, m)).copy_from(&w);
            kmat.view_mut((0, m), (m, nc)).copy_from(&(-ev.jac.transpose()));
            kmat.view_mut((m, 0), (nc, m)).copy_from(&(-&ev.jac));
            let mut rhs = DVector::zeros(m + nc);
            rhs.rows_mut(0, m).copy_from(&(-(&ge - ev.jac.transpose() * &*lambda)));
            rhs.rows_mut(m, nc).copy_from(&ev.g);
            let Some(delta) = kmat.lu().solve(&rhs) else {
                return false;
            };
            let c_new = &*c + delta.rows(0, m);
            let l_new = &*lambda + delta.rows(m, nc);
            let trial = self.kkt(&c_new, &l_new);
            if trial.0.max(trial.1) < best.0.max(best.1) {
                *c = c_new;
                *lambda = l_new;
                best = trial;
            } else {
                break;
            }
        }
        best.0 < opts.tol && best.1 < opts.feas_tol
    }

    /// Smallest eigenvalue of the Lagrangian Hessian on the tangent space of the constraints.
    pub fn reduced_hessian_min_eig(&self, coeffs: &[f64], multipliers: &[f64]) -> f64 {
        let c = DVector::from_column_slice(coeffs);
        let lambda = DVector::from_column_slice(multipliers);
        let ev = self.eval(&c);
        let w = self.lagrangian_hessian(&ev.u, &lambda);
        let m = c.len();
        let nc = lambda.len();
        if m <= nc {
            return f64::INFINITY;
        }
        let jtj = ev.jac.transpose() * &ev.jac;
        let eig = SymmetricEigen::new(jtj);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let z = DMatrix::from_fn(m, m - nc, |i, j| eig.eigenvectors[(i, order[j])]);
        let red = z.transpose() * w * &z;
        SymmetricEigen::new(red).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Nodal values of `|u|^{q-2} u` for the given coefficients.
    pub fn nonlinearity(&self, coeffs: &[f64]) -> Vec<f64> {
        let u = self.backend.synthesize(coeffs);
        u.iter().map(|&v| v.abs().powf(self.q - 2.0) * v).collect()
    }

    pub fn xi_columns(&self) -> &[Vec<f64>] {
        &self.xi_cols
    }
}

/// Solve `H x = b` with `H + tau I` positive definite, `tau` increased geometrically.
fn modified_cholesky_solve(h: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(b));
    }
    let diag_max = (0..h.nrows()).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
    let mut tau = 1e-10 * diag_max;
    for _ in 0..40 {
        let mut shifted = h.clone();
        for i in 0..h.nrows() {
            shifted[(i, i)] += tau;
        }
        if let Some(ch) = shifted.cholesky() {
            return Some(ch.solve(b));
        }
        tau *= 10.0;
    }
    None
}
