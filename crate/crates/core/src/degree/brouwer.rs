//! Brouwer degree of a map `B_{r0} -> R^m`, `r0 = 1 - 1/t0`, by signed zero counting.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::norm;

/// Vector field on the ball, `p -> F(p)`.
pub type BallMap<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync + 'a;

#[derive(Debug, Clone)]
pub struct DegreeOpts {
    pub starts: usize,
    pub seed: u64,
    /// Newton stops when `|F|_inf` falls below this.
    pub newton_tol: f64,
    pub max_newton: usize,
    pub dedupe: f64,
    pub fd_step: f64,
    pub shell_samples: usize,
    /// `|F|` below this on the shell `t in [0.9 t0, t0]` rejects `t0`.
    pub boundary_threshold: f64,
    /// Relative smallest singular value below which a zero is flagged singular.
    pub singular_tol: f64,
}

impl Default for DegreeOpts {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 11,
            newton_tol: 1e-11,
            max_newton: 60,
            dedupe: 1e-6,
            fd_step: 1e-6,
            shell_samples: 256,
            boundary_threshold: 1e-10,
            singular_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Zero {
    pub p: Vec<f64>,
    pub sign: i32,
    pub residual: f64,
    pub det: f64,
    pub singular: bool,
}

#[derive(Debug, Clone)]
pub struct BoundaryCertificate {
    pub samples: usize,
    pub min_norm: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct DegreeReport {
    pub map_id: String,
    pub t0: f64,
    pub zeros: Vec<Zero>,
    pub degree: i64,
    /// Filled in by callers that also ran a Morse analysis.
    pub morse_sum: Option<i64>,
    /// Fraction of shell samples with `G . A > 0`, when a partner field is supplied.
    pub boundary_alignment: Option<f64>,
    pub boundary: BoundaryCertificate,
    /// False when some zero is singular.
    pub reliable: bool,
    pub starts: usize,
}

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// First `count` Halton points of `[-1,1]^m` inside the ball of radius `r`.
pub fn halton_ball(m: usize, r: f64, count: usize) -> Vec<Vec<f64>> {
    assert!(m <= PRIMES.len(), "Halton cloud supports up to {} dimensions", PRIMES.len());
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count && i < 50_000_000 {
        let x: Vec<f64> = (0..m).map(|d| 2.0 * radical_inverse(i, PRIMES[d]) - 1.0).collect();
        if norm(&x) < 1.0 {
            out.push(x.iter().map(|c| c * r).collect());
        }
        i += 1;
    }
    out
}

fn jacobian(map: &BallMap<'_>, p: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let m = p.len();
    let mut j = DMatrix::zeros(m, m);
    for k in 0..m {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[k] += h;
        b[k] -= h;
        let fa = map(&a)?;
        let fb = map(&b)?;
        for i in 0..m {
            j[(i, k)] = (fa[i] - fb[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// Damped Newton from `start`, staying inside `|p| < limit`.
pub fn newton_zero(map: &BallMap<'_>, start: &[f64], limit: f64, opts: &DegreeOpts) -> Option<(Vec<f64>, f64)> {
    let mut p = start.to_vec();
    let mut fp = map(&p).ok()?;
    for _ in 0..opts.max_newton {
        let r = inf_norm(&fp);
        if r < opts.newton_tol {
            return Some((p, r));
        }
        let j = jacobian(map, &p, opts.fd_step).ok()?;
        let d = j.lu().solve(&(-DVector::from_column_slice(&fp)))?;
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = p.iter().zip(d.iter()).map(|(a, b)| a + step * b).collect();
            if norm(&trial) < limit {
                if let Ok(ft) = map(&trial) {
                    if inf_norm(&ft) < r {
                        p = trial;
                        fp = ft;
                        moved = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !moved {
            return None;
        }
    }
    let r = inf_norm(&fp);
    (r < opts.newton_tol).then_some((p, r))
}

/// Minimum of `|F|` over random samples of the shell `t in [0.9 t0, t0]`.
pub fn boundary_certificate(map: &BallMap<'_>, m: usize, t0: f64, opts: &DegreeOpts) -> Result<BoundaryCertificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let pts: Vec<Vec<f64>> = (0..opts.shell_samples)
        .map(|_| {
            let mut d: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let r = norm(&d);
            let t = t0 * (0.9 + 0.1 * rng.random::<f64>());
            let s = (t - 1.0) / t / r;
            d.iter_mut().for_each(|c| *c *= s);
            d
        })
        .collect();
    let norms: Vec<f64> = pts.par_iter().map(|p| map(p).map(|v| norm(&v))).collect::<Result<_>>()?;
    let min_norm = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_norm < opts.boundary_threshold {
        return Err(Error::BoundaryVanishing(min_norm));
    }
    Ok(BoundaryCertificate { samples: pts.len(), min_norm, threshold: opts.boundary_threshold })
}

/// Signed count of zeros of `map` in `{t < t0}`.
pub fn brouwer_degree(map: &BallMap<'_>, m: usize, t0: f64, map_id: &str, opts: &DegreeOpts) -> Result<DegreeReport> {
    if !(t0 > 1.0) {
        return Err(Error::InvalidArgument(format!("t0 = {t0} must exceed 1")));
    }
    let r0 = 1.0 - 1.0 / t0;
    let boundary = boundary_certificate(map, m, t0, opts)?;
    let mut starts = vec![vec![0.0; m]];
    starts.extend(halton_ball(m, r0, opts.starts.saturating_sub(1)));
    // Newton may leave the counted region slightly; zeros outside are discarded.
    let limit = 0.5 * (1.0 + r0);
    let found: Vec<(Vec<f64>, f64)> =
        starts.par_iter().filter_map(|s| newton_zero(map, s, limit, opts)).collect();
    let mut zeros: Vec<Zero> = Vec::new();
    for (p, residual) in found {
        if norm(&p) >= r0 {
            continue;
        }
        if zeros.iter().any(|z| norm(&z.p.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>()) < opts.dedupe) {
            continue;
        }
        let j = jacobian(map, &p, opts.fd_step)?;
        let sv = j.clone().singular_values();
        let (smin, smax) = sv.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
        let det = j.determinant();
        let singular = smax == 0.0 || smin / smax < opts.singular_tol;
        zeros.push(Zero { sign: if det > 0.0 { 1 } else { -1 }, p, residual, det, singular });
    }
    zeros.sort_by(|a, b| norm(&a.p).partial_cmp(&norm(&b.p)).unwrap());
    let degree = zeros.iter().map(|z| z.sign as i64).sum();
    let reliable = zeros.iter().all(|z| !z.singular);
    Ok(DegreeReport {
        map_id: map_id.to_string(),
        t0,
        zeros,
        degree,
        morse_sum: None,
        boundary_alignment: None,
        boundary,
        reliable,
        starts: starts.len(),
    })
}
