//! The reduction at a ball parameter `p`: minimize `E_1[u]` subject to
//! `avg f_p |u|^{2#} = 1` and `avg |u|^{2#} xi_j = 0`, then read off the
//! multipliers and the field `Lambda(p) = C(p)^{-1} A(p)`.
//!
//! Conventions. The stored minimizer `u` has `avg f_p |u|^{2#} = 1` and energy
//! `M_p = E_1[u]`. The rescaled field `uhat = (2 M_p/(n-4))^{(n-4)/8} u` solves
//!
//! ```text
//! P uhat = ((n-4)/2 f_p - Lambda . xi) |uhat|^{2#-2} uhat
//! ```
//!
//! and satisfies `(n-4)/2 (avg f_p |uhat|^{2#})^{4/n} = M_p`. The multipliers
//! `Lambda` reported here refer to that equation.

pub mod optimizer;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fspec::FSpec;
use crate::functionals::{check_compatible, gradient_moments, random_start, shifted_values};
use crate::geometry::{norm, BallParam, ConformalMap, SpherePoint};
use crate::spectral::{Backend, Field};
use optimizer::{ConstrainedProblem, OptimOptions, OptimResult};

/// Condition number above which `C(p)` is rejected.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct ReduceOpts {
    pub optim: OptimOptions,
    /// Seed for a random perturbation of the initial guess; `None` starts from the constant.
    pub seed: Option<u64>,
    pub init_noise: f64,
    /// Resolution bound constant `c` in `t <= c L`.
    pub resolution_c: f64,
    pub convexity: bool,
    /// Largest `|p_{k+1} - p_k|` accepted by [`continuation_sweep`].
    pub step_cap: f64,
}

impl Default for ReduceOpts {
    fn default() -> Self {
        Self {
            optim: OptimOptions::default(),
            seed: None,
            init_noise: 0.1,
            resolution_c: 0.25,
            convexity: true,
            step_cap: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReducedSolution {
    pub p: BallParam,
    /// Minimizer with `avg f_p |u|^{2#} = 1` and `avg u >= 0`.
    pub u: Field,
    pub m_p: f64,
    /// Multipliers of the rescaled equation, one per `xi_j` (zero where the backend
    /// has no freedom).
    pub multipliers: Vec<f64>,
    /// Relative L2 norm of the Galerkin Euler-Lagrange defect after the multiplier fit.
    pub el_residual: f64,
    /// Relative sup norm of the same defect evaluated on the nodes.
    pub nodal_defect: f64,
    pub kkt_residual: f64,
    pub constraint_violation: f64,
    pub min_u: f64,
    /// `|uhat - c_P|_inf` with `c_P = (f0/f(P))^{(n-4)/8}`.
    pub dist_to_constant: f64,
    /// Smallest eigenvalue of the second variation on the constraint tangent space.
    pub convexity: Option<f64>,
    pub indefinite: bool,
    /// `avg u` was zero to tolerance, so the sign was kept as found.
    pub sign_tie: bool,
    pub iterations: usize,
}

impl ReducedSolution {
    /// `(2 M_p/(n-4))^{(n-4)/8}`.
    pub fn rescale_factor(&self) -> f64 {
        let n = self.u.backend().dim().n as f64;
        (2.0 * self.m_p / (n - 4.0)).powf((n - 4.0) / 8.0)
    }

    /// `uhat`, solving the equation with curvature `(n-4)/2 f_p - Lambda . xi`.
    pub fn renormalized(&self) -> Field {
        self.u.scaled(self.rescale_factor())
    }

    pub fn multiplier_norm(&self) -> f64 {
        norm(&self.multipliers)
    }
}

fn resolution_check(backend: &dyn Backend, p: &BallParam, c: f64) -> Result<()> {
    let bound = backend.resolution_bound(c);
    // Relative slack so that `t` recovered from `from_center(P, bound)` passes.
    if p.t() > bound * (1.0 + 1e-12) {
        return Err(Error::Resolution { t: p.t(), bound });
    }
    Ok(())
}

/// Minimize the constrained quotient at `p`, optionally warm-started from `warm` coefficients.
pub fn solve_reduced(
    backend: &Arc<dyn Backend>,
    p: &BallParam,
    f: &FSpec,
    opts: &ReduceOpts,
    warm: Option<&[f64]>,
) -> Result<ReducedSolution> {
    let b = backend.as_ref();
    check_compatible(b, f)?;
    b.check_center(p)?;
    resolution_check(b, p, opts.resolution_c)?;
    let dim = b.dim();
    let q = dim.two_sharp;
    let fp = shifted_values(b, p, f);
    let fmin = fp.iter().cloned().fold(f64::INFINITY, f64::min);
    if fmin <= 0.0 {
        return Err(Error::NonPositive(fmin));
    }
    let symbol: Vec<f64> = b.degrees().iter().map(|&k| dim.paneitz_symbol(k, 1.0)).collect();
    let problem = ConstrainedProblem::new(b, symbol, fp.clone(), q);

    let start = match warm {
        Some(c) => c.to_vec(),
        None => {
            let u0 = b.integrate(&fp).powf(-1.0 / q);
            let mut c = match opts.seed {
                Some(seed) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    random_start(b, &mut rng, opts.init_noise)
                }
                None => {
                    let mut c = vec![0.0; b.n_modes()];
                    c[0] = 1.0;
                    c
                }
            };
            c.iter_mut().for_each(|v| *v *= u0);
            c
        }
    };
    let mut res = problem.solve(&start, &opts.optim)?;
    let sign_tie = res.coeffs[0].abs() < 1e-12;
    if res.coeffs[0] < 0.0 && !sign_tie {
        res.coeffs.iter_mut().for_each(|c| *c = -*c);
    }
    finish(backend, p, f, &problem, &fp, res, sign_tie, opts)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    backend: &Arc<dyn Backend>,
    p: &BallParam,
    f: &FSpec,
    problem: &ConstrainedProblem<'_>,
    fp: &[f64],
    res: OptimResult,
    sign_tie: bool,
    opts: &ReduceOpts,
) -> Result<ReducedSolution> {
    let b = backend.as_ref();
    let dim = b.dim();
    let n = dim.n as f64;
    let u = Field::from_coeffs(backend, res.coeffs.clone());
    let m_p = res.energy;
    let nonlin = problem.nonlinearity(&res.coeffs);

    // Galerkin fit of P u - M f_p N(u) = -sum_j L_j P_band(xi_j N(u)).
    let pu = u.paneitz(1.0);
    let rhs_nodal: Vec<f64> = nonlin.iter().zip(fp).map(|(v, w)| m_p * w * v).collect();
    let rhs = b.analyze(&rhs_nodal);
    let defect0 = DVector::from_iterator(rhs.len(), pu.coeffs().iter().zip(&rhs).map(|(a, c)| a - c));
    let active = b.active_xi();
    let cols: Vec<Vec<f64>> = problem
        .xi_columns()
        .iter()
        .map(|col| b.analyze(&nonlin.iter().zip(col).map(|(v, x)| v * x).collect::<Vec<_>>()))
        .collect();
    let basis = DMatrix::from_fn(defect0.len(), cols.len(), |i, j| cols[j][i]);
    let fitted = (basis.tr_mul(&basis))
        .cholesky()
        .map(|ch| ch.solve(&(-basis.tr_mul(&defect0))))
        .unwrap_or_else(|| DVector::zeros(cols.len()));
    let galerkin = &defect0 + &basis * &fitted;
    let scale = DVector::from_column_slice(pu.coeffs()).norm().max(f64::MIN_POSITIVE);
    let el_residual = galerkin.norm() / scale;

    let mut tilde = vec![0.0; dim.ambient()];
    for (slot, &j) in active.iter().enumerate() {
        tilde[j] = fitted[slot];
    }
    let pu_nodal = pu.values();
    let nodal_defect = (0..b.n_nodes())
        .map(|k| {
            let mut r = pu_nodal[k] - rhs_nodal[k];
            for (slot, col) in problem.xi_columns().iter().enumerate() {
                r += fitted[slot] * col[k] * nonlin[k];
            }
            r.abs()
        })
        .fold(0.0, f64::max)
        / pu_nodal.iter().fold(0.0, |m: f64, v| m.max(v.abs())).max(f64::MIN_POSITIVE);

    let multipliers: Vec<f64> = tilde.iter().map(|l| l * (n - 4.0) / (2.0 * m_p)).collect();
    let min_u = u.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let center = p.center();
    let c_p = dim.constant_solution(f.eval(center.coords()));
    let s = (2.0 * m_p / (n - 4.0)).powf((n - 4.0) / 8.0);
    let dist_to_constant = u.values().iter().map(|v| (s * v - c_p).abs()).fold(0.0, f64::max);
    let convexity = if opts.convexity {
        Some(problem.reduced_hessian_min_eig(&res.coeffs, &res.multipliers))
    } else {
        None
    };
    let indefinite = convexity.is_some_and(|e| e < -1e-8);
    Ok(ReducedSolution {
        p: p.clone(),
        u,
        m_p,
        multipliers,
        el_residual,
        nodal_defect,
        kkt_residual: res.kkt_residual,
        constraint_violation: res.constraint_violation,
        min_u,
        dist_to_constant,
        convexity,
        indefinite,
        sign_tie,
        iterations: res.outer_iterations,
    })
}

/// `C_ij = avg <grad xi_i, grad xi_j> |u|^{2#}`, `A_j = avg <grad f_p, grad xi_j> |u|^{2#}`.
#[derive(Debug, Clone)]
pub struct MultiplierField {
    pub c: DMatrix<f64>,
    pub a: Vec<f64>,
    /// `C^{-1} A`
    pub lambda_vec: Vec<f64>,
    pub condition: f64,
}

/// Computed with the rescaled `uhat`; `lambda_vec` does not depend on the scale.
pub fn multiplier_field(sol: &ReducedSolution, f: &FSpec) -> Result<MultiplierField> {
    let uhat = sol.renormalized();
    let u = &uhat;
    let b = u.backend();
    let m = b.dim().ambient();
    let q = b.dim().two_sharp;
    let mut c = DMatrix::zeros(m, m);
    for (k, (&w, &uk)) in b.weights().iter().zip(u.values()).enumerate() {
        let mass = w * uk.abs().powf(q);
        for i in 0..m {
            for j in i..m {
                let delta = if i == j { 1.0 } else { 0.0 };
                let v = mass * b.orbit_average(k, &mut |x: &[f64]| delta - x[i] * x[j]);
                c[(i, j)] += v;
                if i != j {
                    c[(j, i)] += v;
                }
            }
        }
    }
    let map = ConformalMap::new(&sol.p);
    let a = gradient_moments(u, &|x: &[f64]| map.pull_gradient(x, &f.grad_sphere(&map.apply(x))));
    let eig = SymmetricEigen::new(c.clone());
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    let lambda_vec = c
        .clone()
        .cholesky()
        .ok_or(Error::IllConditioned(condition))?
        .solve(&DVector::from_column_slice(&a));
    Ok(MultiplierField { c, a, lambda_vec: lambda_vec.iter().copied().collect(), condition })
}

/// Warm-started solves along `path`.
pub fn continuation_sweep(
    backend: &Arc<dyn Backend>,
    f: &FSpec,
    path: &[BallParam],
    opts: &ReduceOpts,
) -> Result<Vec<ReducedSolution>> {
    let mut out: Vec<ReducedSolution> = Vec::with_capacity(path.len());
    for (i, p) in path.iter().enumerate() {
        if let Some(prev) = out.last() {
            let step = norm(
                &p.coords().iter().zip(prev.p.coords()).map(|(a, b)| a - b).collect::<Vec<_>>(),
            );
            if step > opts.step_cap {
                return Err(Error::InvalidArgument(format!(
                    "path step {i} has |dp| = {step:.3e} above the cap {}",
                    opts.step_cap
                )));
            }
        }
        let warm = out.last().map(|s| s.u.coeffs().to_vec());
        let sol = solve_reduced(backend, p, f, opts, warm.as_deref()).or_else(|e| match e {
            // A cold start is the fallback when continuation loses the branch.
            Error::NoConvergence { .. } if warm.is_some() => solve_reduced(backend, p, f, opts, None),
            e => Err(e),
        });
        match sol {
            Ok(s) => out.push(s),
            Err(e) => {
                return Err(Error::InvalidArgument(format!("path index {i}: {e}")));
            }
        }
    }
    Ok(out)
}

/// Distances behind the `O(|f_p - f(P)|)` laws, for one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    /// `|f_p - f(P)|_inf` on the nodes.
    pub f_dev: f64,
    /// `|uhat - c_P|_inf`.
    pub u_dist_sup: f64,
    /// `(E_1[uhat - c_P])^{1/2}`, the Paneitz norm of the difference.
    pub u_dist_energy: f64,
    pub min_u: f64,
    pub lambda_norm: f64,
    /// `u_dist_sup / f_dev` (zero when `f_dev` vanishes).
    pub u_ratio: f64,
    pub lambda_ratio: f64,
}

pub fn estimate_checks(sol: &ReducedSolution, f: &FSpec) -> EstimateReport {
    let b = sol.u.backend();
    let dim = b.dim();
    let center: SpherePoint = sol.p.center();
    let f_at = f.eval(center.coords());
    let fp = shifted_values(b.as_ref(), &sol.p, f);
    let f_dev = fp.iter().map(|v| (v - f_at).abs()).fold(0.0, f64::max);
    let c_p = dim.constant_solution(f_at);
    let uhat = sol.renormalized();
    let mut diff = uhat.coeffs().to_vec();
    diff[0] -= c_p;
    let u_dist_energy = diff
        .iter()
        .zip(b.degrees())
        .map(|(c, &k)| dim.paneitz_symbol(k, 1.0) * c * c)
        .sum::<f64>()
        .sqrt();
    let lambda_norm = sol.multiplier_norm();
    let ratio = |x: f64| if f_dev > 0.0 { x / f_dev } else { 0.0 };
    EstimateReport {
        f_dev,
        u_dist_sup: sol.dist_to_constant,
        u_dist_energy,
        min_u: sol.min_u,
        lambda_norm,
        u_ratio: ratio(sol.dist_to_constant),
        lambda_ratio: ratio(lambda_norm),
    }
}
