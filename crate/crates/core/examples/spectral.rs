//! Zonal harmonics on S^6: Paneitz eigenvalues and the Gauss rule.

use qcurv::geometry::Dimension;
use qcurv::spectral::{axisym_backend, axisym_nodes_for};
use qcurv::Field;

fn main() -> qcurv::Result<()> {
    let dim = Dimension::new(6)?;
    let l = 12;
    let b = axisym_backend(&dim, axisym_nodes_for(&dim, l), l, 6)?;
    println!("modes {} nodes {} gram deviation {:.2e}", b.n_modes(), b.n_nodes(), b.gram_deviation());
    for k in 0..=4 {
        let mut c = vec![0.0; b.n_modes()];
        c[k] = 1.0;
        let u = Field::from_coeffs(&b, c);
        let pu = u.paneitz(1.0);
        println!("k = {k}: P e_k / e_k = {:.6}, symbol {:.6}", pu.coeffs()[k], dim.paneitz_symbol(k, 1.0));
    }
    let g = Field::from_fn(&b, |x| (3.0 * x[6]).cos());
    println!("avg cos(3 x_6) = {:.15}", g.mean());
    Ok(())
}
