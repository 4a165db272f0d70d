use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension n = {0} is not supported (need n >= 5)")]
    Dimension(usize),

    #[error("point coincides with the projection pole")]
    ChartSingularity,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature construction failed: {0}")]
    Quadrature(String),

    #[error("grid would have {nodes} nodes, above the cap of {cap}")]
    NodeCap { nodes: usize, cap: usize },

    #[error("Gram matrix deviates from the identity by {0:.3e} (limit 1e-8); grid exactness too low")]
    GramDeviation(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("prescribed function is not positive on the grid (min {0:.6e})")]
    NonPositive(f64),

    #[error("negative exponent applied at a zero node")]
    ZeroToNegativePower,

    #[error("{backend} backend cannot represent center {center:?}")]
    UnsupportedCenter { backend: &'static str, center: Vec<f64> },

    #[error("t = {t:.4} exceeds the resolution bound {bound:.4} for this grid")]
    Resolution { t: f64, bound: f64 },

    #[error("solver did not converge after {iterations} iterations (KKT residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("C(p) has condition number {0:.3e} above 1e8")]
    IllConditioned(f64),

    #[error("map nearly vanishes on the boundary shell (|map| = {0:.3e}); choose another t0")]
    BoundaryVanishing(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
