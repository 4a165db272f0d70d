//! Multistart search for a violation of the improved inequality with a < 1.

use qcurv::functionals::aubin_probe;
use qcurv::spectral::{axisym_backend, axisym_nodes_for};
use qcurv::Dimension;

fn main() -> qcurv::Result<()> {
    let n = 6;
    let dim = Dimension::new(n)?;
    let l = 24;
    let b = axisym_backend(&dim, axisym_nodes_for(&dim, l), l, n)?;
    let r = aubin_probe(&b, 0.95, dim.two_sharp, 20, 2)?;
    let ok = r.starts.iter().filter(|s| s.converged).count();
    println!("a = {}, {ok}/{} converged, best {:.10}, d_n = {}", r.a, r.starts.len(), r.best, dim.d_n);
    Ok(())
}
