//! Empirical probes: uniform nondegeneracy floors, alignment of `G` with `A`,
//! and decay rates along a fixed center.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fspec::FSpec;
use crate::functionals::shifted_values;
use crate::geometry::{dot, norm, BallParam, SpherePoint};
use crate::reduction::{multiplier_field, solve_reduced, ReduceOpts};
use crate::spectral::Backend;

use super::gmap::g_map;

#[derive(Debug, Clone)]
pub struct NondegReport {
    pub alpha: f64,
    /// `min t^alpha |G(P,t)|` (or `t^n |G| / ln t` when `alpha = n`) over the grid.
    pub floor: f64,
    pub argmin_center: Vec<f64>,
    pub argmin_t: f64,
    /// Per-`t` minimum over the centers.
    pub per_t: Vec<(f64, f64)>,
}

/// `+-e_i` followed by `extra` random directions.
pub fn center_grid(m: usize, extra: usize, seed: u64) -> Vec<SpherePoint> {
    let mut out = Vec::new();
    for i in 0..m {
        out.push(SpherePoint::pole(m, i));
        out.push(SpherePoint::pole(m, i).antipode());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        out.push(SpherePoint::normalized(v).expect("nonzero gaussian sample"));
    }
    out
}

fn scaled_magnitude(g: f64, t: f64, alpha: f64, n: usize) -> f64 {
    if (alpha - n as f64).abs() < 1e-12 {
        g * t.powf(alpha) / t.ln()
    } else {
        g * t.powf(alpha)
    }
}

pub fn nondegeneracy_probe(f: &FSpec, alpha: f64, t_grid: &[f64], centers: &[SpherePoint]) -> Result<NondegReport> {
    require_nonconstant(f)?;
    let n = f.n_ambient() - 1;
    if alpha > n as f64 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} exceeds n = {n}")));
    }
    if t_grid.iter().any(|&t| t <= 1.0) {
        return Err(Error::InvalidArgument("probe needs t > 1".into()));
    }
    let mut floor = f64::INFINITY;
    let mut arg = (Vec::new(), 0.0);
    let mut per_t = Vec::new();
    for &t in t_grid {
        let vals: Vec<f64> = centers
            .par_iter()
            .map(|c| {
                let g = g_map(&BallParam::from_center(c, t).expect("t > 1"), f);
                scaled_magnitude(norm(&g), t, alpha, n)
            })
            .collect();
        let (k, v) = vals
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bk, bv), (k, &v)| if v < bv { (k, v) } else { (bk, bv) });
        per_t.push((t, v));
        if v < floor {
            floor = v;
            arg = (centers[k].coords().to_vec(), t);
        }
    }
    Ok(NondegReport { alpha, floor, argmin_center: arg.0, argmin_t: arg.1, per_t })
}

fn require_nonconstant(f: &FSpec) -> Result<()> {
    let (_, h, rest) = f.harmonic_split();
    if rest == 0.0 && h.iter().all(|v| *v == 0.0) {
        return Err(Error::Degenerate("f is constant, so G and A vanish identically".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct AlignmentSample {
    pub p: Vec<f64>,
    pub t: f64,
    pub g: Vec<f64>,
    pub a: Vec<f64>,
    pub dot: f64,
    pub cosine: f64,
}

#[derive(Debug, Clone)]
pub struct AlignmentReport {
    pub samples: Vec<AlignmentSample>,
    pub fraction_positive: f64,
    pub min_dot: f64,
    pub min_cosine: f64,
    /// `(r, min over samples of (r G + (1-r) A) . G)`.
    pub homotopy: Vec<(f64, f64)>,
}

/// Sign of `G . A` at each sample, `A` computed from the reduced solution.
pub fn alignment_check(
    backend: &Arc<dyn Backend>,
    f: &FSpec,
    points: &[BallParam],
    opts: &ReduceOpts,
) -> Result<AlignmentReport> {
    require_nonconstant(f)?;
    let samples: Vec<AlignmentSample> = points
        .par_iter()
        .map(|p| {
            let sol = solve_reduced(backend, p, f, opts, None)
                .map_err(|e| Error::InvalidArgument(format!("sample {:?}: {e}", p.coords())))?;
            let mf = multiplier_field(&sol, f)?;
            let g = g_map(p, f);
            let d = dot(&g, &mf.a);
            let cosine = d / (norm(&g) * norm(&mf.a)).max(f64::MIN_POSITIVE);
            Ok(AlignmentSample { p: p.coords().to_vec(), t: p.t(), g, a: mf.a, dot: d, cosine })
        })
        .collect::<Result<_>>()?;
    let positive = samples.iter().filter(|s| s.dot > 0.0).count();
    let min_dot = samples.iter().map(|s| s.dot).fold(f64::INFINITY, f64::min);
    let min_cosine = samples.iter().map(|s| s.cosine).fold(f64::INFINITY, f64::min);
    let homotopy = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&r| {
            let m = samples
                .iter()
                .map(|s| {
                    let h: Vec<f64> = s.g.iter().zip(&s.a).map(|(g, a)| r * g + (1.0 - r) * a).collect();
                    dot(&h, &s.g)
                })
                .fold(f64::INFINITY, f64::min);
            (r, m)
        })
        .collect();
    Ok(AlignmentReport {
        fraction_positive: positive as f64 / samples.len().max(1) as f64,
        samples,
        min_dot,
        min_cosine,
        homotopy,
    })
}

#[derive(Debug, Clone)]
pub struct DecayFit {
    pub t: Vec<f64>,
    pub g_norm: Vec<f64>,
    /// `avg (f_p - f(P))^2`
    pub f_dev_l2sq: Vec<f64>,
    /// `|A - G1|` with `G1 = n (f0/f(P))^{n/4} G`.
    pub a_minus_g1: Vec<f64>,
    pub slope_g: f64,
    pub slope_f_dev: f64,
    pub slope_a_minus_g1: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Decay of `|G|`, `avg (f_p - f(P))^2` and `|A - G1|` along `t` at a fixed center.
pub fn decay_fit(
    backend: &Arc<dyn Backend>,
    f: &FSpec,
    center: &SpherePoint,
    ts: &[f64],
    opts: &ReduceOpts,
) -> Result<DecayFit> {
    require_nonconstant(f)?;
    let dim = backend.dim();
    let f_at = f.eval(center.coords());
    let g1_scale = dim.n as f64 * (dim.f0 / f_at).powf(dim.n as f64 / 4.0);
    let mut out = DecayFit {
        t: ts.to_vec(),
        g_norm: Vec::new(),
        f_dev_l2sq: Vec::new(),
        a_minus_g1: Vec::new(),
        slope_g: 0.0,
        slope_f_dev: 0.0,
        slope_a_minus_g1: 0.0,
    };
    for &t in ts {
        let p = BallParam::from_center(center, t)?;
        let g = g_map(&p, f);
        let fp = shifted_values(backend.as_ref(), &p, f);
        let dev: Vec<f64> = fp.iter().map(|v| (v - f_at).powi(2)).collect();
        let sol = solve_reduced(backend, &p, f, opts, None)?;
        let mf = multiplier_field(&sol, f)?;
        let diff: Vec<f64> = mf.a.iter().zip(&g).map(|(a, gv)| a - g1_scale * gv).collect();
        out.g_norm.push(norm(&g));
        out.f_dev_l2sq.push(backend.integrate(&dev));
        out.a_minus_g1.push(norm(&diff));
    }
    out.slope_g = loglog_slope(ts, &out.g_norm);
    out.slope_f_dev = loglog_slope(ts, &out.f_dev_l2sq);
    out.slope_a_minus_g1 = loglog_slope(ts, &out.a_minus_g1);
    Ok(out)
}
