//! Sign of G . A along the axis, and the decay of G and A at large t.

use qcurv::degree::{alignment_check, decay_fit};
use qcurv::reduction::ReduceOpts;
use qcurv::spectral::{axisym_backend, axisym_nodes_for};
use qcurv::{BallParam, Dimension, FSpec, SpherePoint};

fn main() -> qcurv::Result<()> {
    let n = 6;
    let dim = Dimension::new(n)?;
    let l = 120;
    let b = axisym_backend(&dim, axisym_nodes_for(&dim, l), l, n)?;
    let f = FSpec::axisym_quadratic(&dim, 0.03, n);
    let north = SpherePoint::north(n + 1);
    let pts: Vec<BallParam> = [6.0, 8.0, 10.0]
        .iter()
        .flat_map(|&t| [BallParam::from_center(&north, t), BallParam::from_center(&north.antipode(), t)])
        .collect::<qcurv::Result<_>>()?;
    let opts = ReduceOpts::default();
    let r = alignment_check(&b, &f, &pts, &opts)?;
    println!("G . A > 0 on {:.0}% of samples, min cosine {:.6}", 100.0 * r.fraction_positive, r.min_cosine);
    let fit = decay_fit(&b, &f, &north, &[10.0, 14.0, 20.0, 28.0], &opts)?;
    println!("slopes: |G| {:.3}, |f_p - f(P)|^2 {:.3}, |A - G| {:.3}", fit.slope_g, fit.slope_f_dev, fit.slope_a_minus_g1);
    Ok(())
}
