//! Constrained minimizers along the symmetry axis and the multiplier field.

use qcurv::geometry::{BallParam, Dimension};
use qcurv::reduction::{continuation_sweep, estimate_checks, multiplier_field, ReduceOpts};
use qcurv::spectral::{axisym_backend, axisym_nodes_for};
use qcurv::FSpec;

fn main() -> qcurv::Result<()> {
    let n = 6;
    let dim = Dimension::new(n)?;
    let l = 40;
    let b = axisym_backend(&dim, axisym_nodes_for(&dim, l), l, n)?;
    let f = FSpec::axisym_quadratic(&dim, 0.03, n);
    let path: Vec<BallParam> = (0..8)
        .map(|i| {
            let mut v = vec![0.0; n + 1];
            v[n] = 0.1 * i as f64;
            BallParam::new(v)
        })
        .collect::<qcurv::Result<_>>()?;
    let sweep = continuation_sweep(&b, &f, &path, &ReduceOpts::default())?;
    println!("{:>6} {:>14} {:>12} {:>12} {:>10}", "s", "m_p", "Lambda_n", "C^-1 A", "min u");
    for sol in &sweep {
        let mf = multiplier_field(sol, &f)?;
        let est = estimate_checks(sol, &f);
        println!(
            "{:>6.2} {:>14.10} {:>12.4e} {:>12.4e} {:>10.6}",
            sol.p.coords()[n],
            sol.m_p,
            sol.multipliers[n],
            mf.lambda_vec[n],
            est.min_u
        );
    }
    Ok(())
}
