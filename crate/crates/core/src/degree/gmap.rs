//! The map `G(p) = avg (f o phi_{P,t}) xi`, computed in the frame of `P`.
//!
//! With `x = H (omega sech s, tanh s)`, `H e_{n+1} = P`, the normalized measure is
//! `k_n sech^n(s) ds d(omega)` and `phi_{P,t}` is the translation `s -> s + ln t`.
//! The `omega` integrals of the polynomial `f o H` are exact sphere moments; the
//! remaining integral over the line is done by the trapezoid rule, which converges
//! geometrically for these analytic, exponentially decaying integrands.

use statrs::function::gamma::ln_gamma;

use crate::fspec::FSpec;
use crate::geometry::{sphere_moment, BallParam, Frame};

#[derive(Debug, Clone)]
pub struct GOpts {
    /// Trapezoid step in the log-radial variable.
    pub h: f64,
    /// Accepted difference between steps `h` and `h/2`.
    pub tol: f64,
    pub max_refine: usize,
}

impl Default for GOpts {
    fn default() -> Self {
        Self { h: 0.2, tol: 1e-13, max_refine: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct GValue {
    pub value: Vec<f64>,
    /// Max-norm difference between the last two step sizes.
    pub error_estimate: f64,
    /// Number of step halvings beyond the first comparison.
    pub refinements: usize,
}

struct Moments {
    /// `(coeff * avg omega^beta', a-power, b-power)` for the radial part.
    radial: Vec<(f64, i32, i32)>,
    /// Same with an extra `omega_i`, one list per tangential direction.
    tangential: Vec<Vec<(f64, i32, i32)>>,
}

fn moments(fhat: &FSpec) -> Moments {
    let m = fhat.n_ambient();
    let nm1 = m - 2;
    let mut radial = Vec::new();
    let mut tangential = vec![Vec::new(); m - 1];
    for t in fhat.terms() {
        let inner = &t.exps[..m - 1];
        let pa = inner.iter().sum::<u32>() as i32;
        let pb = t.exps[m - 1] as i32;
        let m0 = sphere_moment(nm1, inner);
        if m0 != 0.0 {
            radial.push((t.coeff * m0, pa, pb));
        }
        for (i, list) in tangential.iter_mut().enumerate() {
            let mut e = inner.to_vec();
            e[i] += 1;
            let mi = sphere_moment(nm1, &e);
            if mi != 0.0 {
                list.push((t.coeff * mi, pa, pb));
            }
        }
    }
    Moments { radial, tangential }
}

fn poly(terms: &[(f64, i32, i32)], a: f64, b: f64) -> f64 {
    terms.iter().map(|&(c, pa, pb)| c * a.powi(pa) * b.powi(pb)).sum()
}

/// `Gamma((n+1)/2) / (sqrt(pi) Gamma(n/2))`, the normalized line measure constant.
fn line_constant(n: usize) -> f64 {
    let nf = n as f64;
    (ln_gamma((nf + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln() - ln_gamma(nf / 2.0)).exp()
}

fn trapezoid(mom: &Moments, n: usize, ell: f64, h: f64) -> Vec<f64> {
    let m = n + 1;
    // sech^n(s) < 1e-19 beyond this half-width
    let half = (44.0 + n as f64 * std::f64::consts::LN_2) / n as f64;
    let k = (half / h).ceil() as i64;
    let mut out = vec![0.0; m];
    for j in -k..=k {
        let s = j as f64 * h;
        let sigma = s + ell;
        let (a, b) = (1.0 / sigma.cosh(), sigma.tanh());
        let w = (1.0 / s.cosh()).powi(n as i32);
        let sech_s = 1.0 / s.cosh();
        for (i, list) in mom.tangential.iter().enumerate() {
            if !list.is_empty() {
                out[i] += w * sech_s * poly(list, a, b);
            }
        }
        out[m - 1] += w * s.tanh() * poly(&mom.radial, a, b);
    }
    let c = line_constant(n) * h;
    out.iter_mut().for_each(|v| *v *= c);
    out
}

/// `G(p)` with a step-halving error estimate.
pub fn g_map_with(p: &BallParam, f: &FSpec, opts: &GOpts) -> GValue {
    let m = f.n_ambient();
    let n = m - 1;
    let center = p.center();
    let frame = Frame::new(center.coords());
    let mom = moments(&f.compose_frame(&frame));
    let ell = p.t().ln();
    let mut h = opts.h;
    let mut prev = trapezoid(&mom, n, ell, h);
    let mut err = f64::INFINITY;
    let mut refinements = 0;
    for r in 0..=opts.max_refine {
        h *= 0.5;
        let next = trapezoid(&mom, n, ell, h);
        err = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prev = next;
        refinements = r;
        let scale = prev.iter().fold(1.0, |acc: f64, v| acc.max(v.abs()));
        if err <= opts.tol * scale {
            break;
        }
    }
    GValue { value: frame.apply(&prev), error_estimate: err, refinements }
}

pub fn g_map(p: &BallParam, f: &FSpec) -> Vec<f64> {
    g_map_with(p, f, &GOpts::default()).value
}
