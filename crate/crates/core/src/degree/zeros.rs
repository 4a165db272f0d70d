//! Zeros of the multiplier field `p -> Lambda(p)`.

use std::sync::{Arc, Mutex};

use crate::error::Result;
use crate::fspec::FSpec;
use crate::geometry::{norm, BallParam};
use crate::reduction::{continuation_sweep, solve_reduced, ReduceOpts, ReducedSolution};
use crate::spectral::Backend;

use super::brouwer::{halton_ball, newton_zero, DegreeOpts};

#[derive(Debug, Clone)]
pub struct ZeroOpts {
    pub reduce: ReduceOpts,
    /// Accept `p` when `|Lambda(p)| < tol`.
    pub tol: f64,
    /// Points of the axial sweep (axisymmetric backends).
    pub sweep_points: usize,
    pub max_bisect: usize,
    /// Newton starts (full backend).
    pub starts: usize,
}

impl Default for ZeroOpts {
    fn default() -> Self {
        Self { reduce: ReduceOpts::default(), tol: 1e-8, sweep_points: 32, max_bisect: 200, starts: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct ZeroSearch {
    pub solution: Option<ReducedSolution>,
    pub evaluations: usize,
    /// `(p, Lambda(p))` at every sweep point.
    pub sweep: Vec<(Vec<f64>, Vec<f64>)>,
    pub brackets: usize,
    pub note: String,
}

/// Largest `|p|` searched: inside `{t < t0}` and within the resolution bound.
fn search_radius(backend: &dyn Backend, t0: f64, opts: &ReduceOpts) -> f64 {
    let t_max = t0.min(backend.resolution_bound(opts.resolution_c));
    (1.0 - 1.0 / t_max).max(0.0)
}

fn axis_param(m: usize, axis: usize, s: f64) -> Result<BallParam> {
    let mut v = vec![0.0; m];
    v[axis] = s;
    BallParam::new(v)
}

/// Degree-guided search: an axial sweep with bisection on axisymmetric backends,
/// multistart Newton with finite-difference Jacobians otherwise.
pub fn find_lambda_zero(backend: &Arc<dyn Backend>, f: &FSpec, t0: f64, opts: &ZeroOpts) -> Result<ZeroSearch> {
    let m = backend.dim().ambient();
    let origin = solve_reduced(backend, &BallParam::origin(m), f, &opts.reduce, None)?;
    if origin.multiplier_norm() < opts.tol {
        return Ok(ZeroSearch {
            sweep: vec![(vec![0.0; m], origin.multipliers.clone())],
            solution: Some(origin),
            evaluations: 1,
            brackets: 0,
            note: "Lambda vanishes at p = 0".into(),
        });
    }
    let r0 = search_radius(backend.as_ref(), t0, &opts.reduce);
    match backend.symmetry_axis() {
        Some(axis) => axial_search(backend, f, axis, r0, opts),
        None => newton_search(backend, f, r0, origin, opts),
    }
}

fn axial_search(backend: &Arc<dyn Backend>, f: &FSpec, axis: usize, r0: f64, opts: &ZeroOpts) -> Result<ZeroSearch> {
    let m = backend.dim().ambient();
    let k = opts.sweep_points.max(2);
    // Symmetric grid without s = 0 (the origin is handled by the caller).
    let s_values: Vec<f64> = (0..k).map(|i| r0 * (2.0 * i as f64 + 1.0 - k as f64) / k as f64).collect();
    let path = s_values.iter().map(|&s| axis_param(m, axis, s)).collect::<Result<Vec<_>>>()?;
    let mut sweep_opts = opts.reduce.clone();
    sweep_opts.step_cap = sweep_opts.step_cap.max(2.0 * r0 / k as f64 + 1e-12);
    let sols = continuation_sweep(backend, f, &path, &sweep_opts)?;
    let mut evaluations = sols.len() + 1;
    let sweep: Vec<(Vec<f64>, Vec<f64>)> = sols.iter().map(|s| (s.p.coords().to_vec(), s.multipliers.clone())).collect();
    let lam = |s: &ReducedSolution| s.multipliers[axis];
    if let Some(sol) = sols.iter().filter(|s| lam(s).abs() < opts.tol).min_by(|a, b| {
        a.p.radius().partial_cmp(&b.p.radius()).unwrap()
    }) {
        return Ok(ZeroSearch { solution: Some(sol.clone()), evaluations, sweep, brackets: 0, note: "zero on sweep grid".into() });
    }
    let mut brackets: Vec<(usize, usize)> =
        (0..sols.len() - 1).filter(|&i| lam(&sols[i]) * lam(&sols[i + 1]) < 0.0).map(|i| (i, i + 1)).collect();
    let n_brackets = brackets.len();
    brackets.sort_by(|a, b| {
        let ra = s_values[a.0].abs().min(s_values[a.1].abs());
        let rb = s_values[b.0].abs().min(s_values[b.1].abs());
        ra.partial_cmp(&rb).unwrap()
    });
    for (i, j) in brackets {
        let (mut lo, mut hi) = (sols[i].clone(), sols[j].clone());
        let (mut slo, mut shi) = (s_values[i], s_values[j]);
        for _ in 0..opts.max_bisect {
            let mid = 0.5 * (slo + shi);
            let warm = if (mid - slo).abs() < (shi - mid).abs() { &lo } else { &hi };
            let sol = solve_reduced(backend, &axis_param(m, axis, mid)?, f, &opts.reduce, Some(warm.u.coeffs()))?;
            evaluations += 1;
            if lam(&sol).abs() < opts.tol {
                return Ok(ZeroSearch {
                    solution: Some(sol),
                    evaluations,
                    sweep,
                    brackets: n_brackets,
                    note: "bisection converged".into(),
                });
            }
            if lam(&sol) * lam(&lo) < 0.0 {
                hi = sol;
                shi = mid;
            } else {
                lo = sol;
                slo = mid;
            }
            if (shi - slo).abs() < 1e-15 {
                break;
            }
        }
    }
    Ok(ZeroSearch {
        solution: None,
        evaluations,
        sweep,
        brackets: n_brackets,
        note: format!("no zero below {:.1e} in |s| < {r0:.4} ({n_brackets} sign changes)", opts.tol),
    })
}

fn newton_search(
    backend: &Arc<dyn Backend>,
    f: &FSpec,
    r0: f64,
    origin: ReducedSolution,
    opts: &ZeroOpts,
) -> Result<ZeroSearch> {
    let m = backend.dim().ambient();
    // Warm-start cache; the only shared state between evaluations.
    let cache: Mutex<Vec<(Vec<f64>, Vec<f64>)>> = Mutex::new(vec![(vec![0.0; m], origin.u.coeffs().to_vec())]);
    let evaluations = Mutex::new(1usize);
    let map = |p: &[f64]| -> Result<Vec<f64>> {
        let warm = {
            let c = cache.lock().expect("cache lock");
            c.iter()
                .min_by(|a, b| dist(&a.0, p).partial_cmp(&dist(&b.0, p)).unwrap())
                .map(|e| e.1.clone())
        };
        let sol = solve_reduced(backend, &BallParam::new(p.to_vec())?, f, &opts.reduce, warm.as_deref())?;
        *evaluations.lock().expect("counter lock") += 1;
        cache.lock().expect("cache lock").push((p.to_vec(), sol.u.coeffs().to_vec()));
        Ok(sol.multipliers)
    };
    let dopts = DegreeOpts { newton_tol: opts.tol, ..DegreeOpts::default() };
    let mut starts = vec![vec![0.0; m]];
    starts.extend(halton_ball(m, r0, opts.starts.saturating_sub(1)));
    for s in &starts {
        if let Some((p, _)) = newton_zero(&map, s, r0, &dopts) {
            let sol = solve_reduced(backend, &BallParam::new(p)?, f, &opts.reduce, None)?;
            if sol.multiplier_norm() < opts.tol {
                let evaluations = *evaluations.lock().expect("counter lock");
                return Ok(ZeroSearch {
                    solution: Some(sol),
                    evaluations,
                    sweep: Vec::new(),
                    brackets: 0,
                    note: "Newton converged".into(),
                });
            }
        }
    }
    let evaluations = *evaluations.lock().expect("counter lock");
    Ok(ZeroSearch {
        solution: None,
        evaluations,
        sweep: Vec::new(),
        brackets: 0,
        note: format!("no zero from {} Newton starts in |p| < {r0:.4}", starts.len()),
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
}
