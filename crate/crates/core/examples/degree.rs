//! Morse data of f and the Brouwer degree of G on a large ball.

use qcurv::degree::{brouwer_degree, euler_sum, g_map, morse_analysis, morse_sum, DegreeOpts, MorseOpts};
use qcurv::{BallParam, Dimension, FSpec};

fn main() -> qcurv::Result<()> {
    for n in [5, 6, 8] {
        let dim = Dimension::new(n)?;
        let f = FSpec::quadratic(&dim, 0.03, &FSpec::generic_weights(n + 1))?;
        let data = morse_analysis(&f, &MorseOpts::default());
        let map = |p: &[f64]| -> qcurv::Result<Vec<f64>> { Ok(g_map(&BallParam::new(p.to_vec())?, &f)) };
        let r = brouwer_degree(&map, n + 1, 20.0, "G", &DegreeOpts::default())?;
        println!(
            "n = {n}: {} critical points, euler {}, morse {}, deg G = {} ({} zeros, reliable {})",
            data.points.len(),
            euler_sum(&data),
            morse_sum(&data),
            r.degree,
            r.zeros.len(),
            r.reliable
        );
    }
    Ok(())
}
