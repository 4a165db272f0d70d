//! Conformal dilations, their Jacobians and the invariance of the Paneitz energy.

use qcurv::functionals::quotient_jaq;
use qcurv::geometry::{pullback_t, BallParam, ConformalMap, Dimension, SpherePoint};
use qcurv::spectral::{axisym_backend, axisym_nodes_for};
use qcurv::Field;

fn main() -> qcurv::Result<()> {
    let n = 6;
    let dim = Dimension::new(n)?;
    let l = 48;
    let b = axisym_backend(&dim, axisym_nodes_for(&dim, l), l, n)?;
    let north = SpherePoint::north(n + 1);
    let u = Field::from_fn(&b, |x| 1.0 + 0.2 * x[n] + 0.1 * x[n] * x[n]);
    let j0 = quotient_jaq(&u, 1.0, dim.two_sharp)?;
    println!("J(u) = {j0:.12}");
    for t in [1.5, 2.0, 3.0] {
        let p = BallParam::from_center(&north, t)?;
        let map = ConformalMap::new(&p);
        let v = Field::from_fn(&b, pullback_t(&p, |y| u.eval(y)));
        let j = quotient_jaq(&v, 1.0, dim.two_sharp)?;
        println!(
            "t = {t}: |det| at P {:.3e} at -P {:.3e}, J(T u) = {j:.12}",
            map.jacobian(north.coords()),
            map.jacobian(north.antipode().coords())
        );
    }
    Ok(())
}
