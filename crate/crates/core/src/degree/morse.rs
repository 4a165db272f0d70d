//! Critical points of `f` on `S^n` with Morse indices and `Delta_h f`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fspec::FSpec;
use crate::geometry::{dot, norm, Frame};

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    pub value: f64,
    /// Number of negative eigenvalues of the Riemannian Hessian.
    pub index: usize,
    /// `Delta_h f(x)`, geometer's sign.
    pub laplacian: f64,
    pub hessian_eigs: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct MorseData {
    pub points: Vec<CriticalPoint>,
    /// Smallest `|eigenvalue|` over all points, relative to the coefficient scale of `f`.
    pub margin: f64,
    /// Any degenerate critical point found; sums are then unreliable.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct MorseOpts {
    pub random_starts: usize,
    pub seed: u64,
    pub dedupe: f64,
    /// Relative eigenvalue threshold below which a point is flagged degenerate.
    pub degeneracy_tol: f64,
}

impl Default for MorseOpts {
    fn default() -> Self {
        Self { random_starts: 200, seed: 7, dedupe: 1e-6, degeneracy_tol: 1e-7 }
    }
}

fn hessian(f: &FSpec, x: &[f64]) -> DMatrix<f64> {
    let m = x.len();
    DMatrix::from_row_slice(m, m, &f.hess_ambient(x))
}

/// Newton on `grad F - lambda x = 0, |x|^2 = 1`.
fn newton(f: &FSpec, start: &[f64], scale: f64) -> Option<Vec<f64>> {
    let m = start.len();
    let mut x: Vec<f64> = start.iter().map(|c| c / norm(start)).collect();
    let mut lam = dot(&x, &f.grad_ambient(&x));
    for _ in 0..80 {
        let g = f.grad_ambient(&x);
        let r: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - lam * xi).collect();
        if norm(&f.grad_sphere(&x)) < 1e-13 * scale {
            return Some(x);
        }
        let h = hessian(f, &x);
        let mut j = DMatrix::zeros(m + 1, m + 1);
        for a in 0..m {
            for b in 0..m {
                j[(a, b)] = h[(a, b)] - if a == b { lam } else { 0.0 };
            }
            j[(a, m)] = -x[a];
            j[(m, a)] = x[a];
        }
        let mut rhs = DVector::zeros(m + 1);
        for a in 0..m {
            rhs[a] = -r[a];
        }
        rhs[m] = -(dot(&x, &x) - 1.0) / 2.0;
        let d = j.lu().solve(&rhs)?;
        let step = d.rows(0, m).norm().max(1e-300);
        // Keep steps on the scale of the sphere.
        let damp = (0.5 / step).min(1.0);
        for a in 0..m {
            x[a] += damp * d[a];
        }
        lam += damp * d[m];
        let r = norm(&x);
        x.iter_mut().for_each(|c| *c /= r);
    }
    (norm(&f.grad_sphere(&x)) < 1e-11 * scale).then_some(x)
}

fn classify(f: &FSpec, x: Vec<f64>, scale: f64, tol: f64) -> CriticalPoint {
    let m = x.len();
    let lam = dot(&x, &f.grad_ambient(&x));
    let h = hessian(f, &x);
    let frame = Frame::new(&x);
    let z = DMatrix::from_fn(m, m - 1, |i, j| frame.column(j)[i]);
    let mut red = z.transpose() * (h - DMatrix::identity(m, m) * lam) * &z;
    red = (&red + red.transpose()) * 0.5;
    let mut eigs: Vec<f64> = SymmetricEigen::new(red).eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let degenerate = eigs.iter().any(|e| e.abs() < tol * scale);
    CriticalPoint {
        value: f.eval(&x),
        index: eigs.iter().filter(|&&e| e < 0.0).count(),
        laplacian: f.laplacian_h(&x),
        hessian_eigs: eigs,
        degenerate,
        x,
    }
}

/// Critical points from starts at `+-e_i` and random points, deduplicated.
pub fn morse_analysis(f: &FSpec, opts: &MorseOpts) -> MorseData {
    let m = f.n_ambient();
    let scale = f.terms().iter().filter(|t| t.exps.iter().any(|&e| e > 0)).map(|t| t.coeff.abs()).sum::<f64>();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; m];
            e[i] = s;
            starts.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_starts {
        starts.push((0..m).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    let mut points: Vec<CriticalPoint> = Vec::new();
    if scale == 0.0 {
        return MorseData { points, margin: 0.0, degenerate: true };
    }
    for s in &starts {
        let Some(x) = newton(f, s, scale) else { continue };
        let dup = points.iter().any(|p| {
            norm(&p.x.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>()) < opts.dedupe
        });
        if !dup {
            points.push(classify(f, x, scale, opts.degeneracy_tol));
        }
    }
    points.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap());
    let margin = points
        .iter()
        .flat_map(|p| p.hessian_eigs.iter().map(|e| e.abs()))
        .fold(f64::INFINITY, f64::min)
        / scale;
    let degenerate = points.iter().any(|p| p.degenerate);
    MorseData { points, margin, degenerate }
}

/// `sum (-1)^index` over critical points with `Delta_h f > 0`.
pub fn morse_sum(data: &MorseData) -> i64 {
    data.points
        .iter()
        .filter(|p| p.laplacian > 0.0)
        .map(|p| if p.index % 2 == 0 { 1 } else { -1 })
        .sum()
}

/// `sum (-1)^index` over all critical points; equals `1 + (-1)^n` for Morse functions.
pub fn euler_sum(data: &MorseData) -> i64 {
    data.points.iter().map(|p| if p.index % 2 == 0 { 1 } else { -1 }).sum()
}
