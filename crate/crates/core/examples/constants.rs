//! Dimension constants and the identities they satisfy.

use qcurv::geometry::Dimension;

fn main() -> qcurv::Result<()> {
    println!("{:>3} {:>10} {:>12} {:>12} {:>8} {:>14}", "n", "c_n", "d_n", "f0", "2#", "P(xi)/xi");
    for n in 5..=10 {
        let d = Dimension::new(n)?;
        println!(
            "{:>3} {:>10.4} {:>12.4} {:>12.4} {:>8.4} {:>14.4}",
            n,
            d.c_n,
            d.d_n,
            d.f0,
            d.two_sharp,
            d.paneitz_symbol(1, 1.0)
        );
        assert_eq!(d.d_n, (n as f64 - 4.0) * d.f0 / 2.0);
    }
    Ok(())
}
