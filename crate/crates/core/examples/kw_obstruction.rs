//! The Kazdan-Warner moment of f = f0 (1 + eps x_j) never vanishes, so the
//! solver reports no certified solution for this family.

use qcurv::functionals::kw_residual;
use qcurv::pipeline::{run_solve, Preset, RunConfig};
use qcurv::spectral::{axisym_backend, axisym_nodes_for};
use qcurv::{Dimension, FSpec, Field};

fn main() -> qcurv::Result<()> {
    let n = 6;
    let dim = Dimension::new(n)?;
    let b = axisym_backend(&dim, axisym_nodes_for(&dim, 8), 8, n)?;
    let f = FSpec::kw_family(&dim, 0.05, n);
    let kw = kw_residual(&Field::constant(&b, 1.0), &f);
    println!("KW moment of u = 1: {:.6e} (expected {:.6e})", kw[n], 0.05 * dim.f0 * n as f64 / (n + 1) as f64);

    let mut cfg = RunConfig::default();
    cfg.f.preset = Preset::Kw;
    cfg.f.eps = 0.05;
    let run = run_solve(&cfg)?;
    let c = &run.certificate;
    println!("status: {}", c.status);
    println!("closest |Lambda| = {:.3e}, KW residual = {:.3e}", c.lambda_norm, c.kw_residual.iter().map(|v| v.abs()).fold(0.0, f64::max));
    Ok(())
}
