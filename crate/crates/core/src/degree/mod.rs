//! Degree theory for the reduced problem.

pub mod brouwer;
pub mod expansion;
pub mod gmap;
pub mod morse;
pub mod probes;
pub mod zeros;

pub use brouwer::{brouwer_degree, halton_ball, BallMap, DegreeOpts, DegreeReport, Zero};
pub use expansion::{calibrate, expansion_error, g_expansion, ExpansionCoeffs};
pub use gmap::{g_map, g_map_with, GOpts, GValue};
pub use morse::{euler_sum, morse_analysis, morse_sum, CriticalPoint, MorseData, MorseOpts};
pub use probes::{alignment_check, center_grid, decay_fit, nondegeneracy_probe, AlignmentReport, DecayFit, NondegReport};
pub use zeros::{find_lambda_zero, ZeroOpts, ZeroSearch};
