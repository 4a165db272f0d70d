//! Numerical laboratory for prescribing the fourth-order Q-curvature on the
//! round sphere `S^n`, `n >= 5`, by finite-dimensional reduction over the
//! conformal group.
//!
//! The pieces, bottom up:
//!
//! * [`geometry`]: dimension constants, stereographic charts, the dilations
//!   `phi_{P,t}` and the weighted pullback `T_phi`.
//! * [`spectral`]: band-limited fields on axisymmetric or full-sphere grids.
//! * [`functionals`]: Paneitz energies, Sobolev quotients, PDE and
//!   Kazdan-Warner residuals, the improved-inequality probe.
//! * [`reduction`]: the constrained minimization at each ball parameter `p`
//!   and the multiplier field `Lambda(p) = C(p)^{-1} A(p)`.
//! * [`degree`]: the map `G`, its large-`t` expansion, Morse data, Brouwer
//!   degree by signed zero counting and zero finding for `Lambda`.
//! * [`pipeline`]: configuration, commands and deterministic reports.

pub mod degree;
pub mod error;
pub mod fspec;
pub mod functionals;
pub mod geometry;
pub mod pipeline;
pub mod reduction;
pub mod spectral;

pub use error::{Error, Result};
pub use fspec::{FSpec, Term};
pub use geometry::{BallParam, Dimension, SpherePoint};
pub use spectral::{Backend, Field};
