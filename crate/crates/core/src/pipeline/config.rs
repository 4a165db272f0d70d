//! Run configuration: TOML or JSON file plus command-line overrides.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fspec::{FSpec, Term};
use crate::geometry::Dimension;
use crate::spectral::{axisym_backend, axisym_nodes_for, full_backend, Backend};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Axisym,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `f = value` (defaults to `f0`).
    Constant,
    /// `f0 (1 + eps xi_j)`, `j = direction`.
    Kw,
    /// `f0 (1 + eps (x_a^2 - 1/(n+1)))` about the backend axis.
    AxisymQuadratic,
    /// `f0 (1 + eps sum a_i x_i^2)` with distinct weights.
    GenericQuadratic,
    /// `f0 (1 + eps Z_3(x_a))` about the backend axis.
    ZonalCubic,
    /// Explicit monomials in `terms`.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FConfig {
    pub preset: Preset,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Term>>,
}

impl Default for FConfig {
    fn default() -> Self {
        Self { preset: Preset::AxisymQuadratic, eps: default_eps(), value: None, direction: None, weights: None, terms: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative KKT tolerance of the constrained solver.
    pub solver: f64,
    /// Zero search stops once `|Lambda| < zero_search`.
    pub zero_search: f64,
    pub lambda_gate: f64,
    pub residual_gate: f64,
    pub kw_gate: f64,
    pub dedupe: f64,
    /// H1 passes when `|f - f0|_inf / f0` is at most this.
    pub h1_max: f64,
    /// H2 passes when the `alpha = 2` floor, divided by `f0`, exceeds this.
    pub h2_floor_min: f64,
    /// Resolution constant `c` in `t <= c L`.
    pub resolution_c: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver: 1e-10,
            zero_search: 1e-8,
            lambda_gate: 1e-6,
            residual_gate: 1e-3,
            kw_gate: 1e-6,
            dedupe: 1e-6,
            h1_max: 0.1,
            h2_floor_min: 1e-8,
            resolution_c: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub alpha: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Random centers added to `+-e_i` and the critical points of `f`.
    pub extra_centers: usize,
    pub degree_starts: usize,
    pub aubin_a: f64,
    pub aubin_starts: usize,
    /// Decay fit abscissae. Asymptotic slopes need t >= 10 with band_limit >= 120.
    pub decay_t: Vec<f64>,
    pub alignment_t: Vec<f64>,
    pub sweep_points: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            alpha: vec![2.0, 3.0],
            t_grid: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            extra_centers: 48,
            degree_starts: 64,
            aubin_a: 0.95,
            aubin_starts: 50,
            decay_t: vec![4.0, 6.0, 8.0, 10.0],
            alignment_t: vec![6.0, 7.0, 8.0, 9.0, 10.0],
            sweep_points: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_backend")]
    pub backend: BackendKind,
    #[serde(default = "default_band_limit")]
    pub band_limit: usize,
    /// Full-grid oversampling factor.
    #[serde(default = "default_oversample")]
    pub oversample: f64,
    /// Symmetry axis of the axisymmetric backend; defaults to the last coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default)]
    pub f: FConfig,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub probe: ProbeConfig,
}

fn default_n() -> usize {
    6
}
fn default_backend() -> BackendKind {
    BackendKind::Axisym
}
fn default_band_limit() -> usize {
    40
}
fn default_oversample() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    0.03
}
fn default_t0() -> f64 {
    8.0
}
fn default_seed() -> u64 {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: default_n(),
            backend: default_backend(),
            band_limit: default_band_limit(),
            oversample: default_oversample(),
            axis: None,
            f: FConfig::default(),
            t0: default_t0(),
            seed: default_seed(),
            out: default_out(),
            tolerances: Tolerances::default(),
            probe: ProbeConfig::default(),
        }
    }
}

/// Command-line overrides, applied after the file is read.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub backend: Option<BackendKind>,
    pub band_limit: Option<usize>,
    pub t0: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub preset: Option<Preset>,
}

impl RunConfig {
    /// Parse TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(v) = o.n {
            self.n = v;
        }
        if let Some(v) = o.backend {
            self.backend = v;
        }
        if let Some(v) = o.band_limit {
            self.band_limit = v;
        }
        if let Some(v) = o.t0 {
            self.t0 = v;
        }
        if let Some(v) = o.eps {
            self.f.eps = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.preset {
            self.f.preset = v;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dimension()?;
        let m = dim.ambient();
        if self.band_limit == 0 {
            return Err(Error::Config("band_limit must be positive".into()));
        }
        if !(self.t0 > 1.0) {
            return Err(Error::Config(format!("t0 = {} must exceed 1", self.t0)));
        }
        if !(self.oversample >= 1.0) {
            return Err(Error::Config("oversample must be at least 1".into()));
        }
        if self.axis.is_some_and(|a| a >= m) {
            return Err(Error::Config(format!("axis must be below {m}")));
        }
        if self.f.direction.is_some_and(|a| a >= m) {
            return Err(Error::Config(format!("f.direction must be below {m}")));
        }
        if self.f.preset == Preset::Custom && self.f.terms.is_none() {
            return Err(Error::Config("custom preset needs f.terms".into()));
        }
        if self.probe.alpha.iter().any(|&a| a <= 0.0 || a > self.n as f64) {
            return Err(Error::Config(format!("probe.alpha values must lie in (0, {}]", self.n)));
        }
        if self.probe.t_grid.iter().any(|&t| t <= 1.0) || !self.probe.t_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("probe.t_grid must be increasing and above 1".into()));
        }
        Ok(())
    }

    pub fn dimension(&self) -> Result<Dimension> {
        Dimension::new(self.n).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn axis(&self) -> usize {
        self.axis.unwrap_or(self.n)
    }

    pub fn fspec(&self) -> Result<FSpec> {
        let dim = self.dimension()?;
        let m = dim.ambient();
        let eps = self.f.eps;
        let f = match self.f.preset {
            Preset::Constant => FSpec::constant(m, self.f.value.unwrap_or(dim.f0)),
            Preset::Kw => FSpec::kw_family(&dim, eps, self.f.direction.unwrap_or(self.axis())),
            Preset::AxisymQuadratic => FSpec::axisym_quadratic(&dim, eps, self.axis()),
            Preset::GenericQuadratic => {
                let w = self.f.weights.clone().unwrap_or_else(|| FSpec::generic_weights(m));
                FSpec::quadratic(&dim, eps, &w)?
            }
            Preset::ZonalCubic => FSpec::zonal_cubic(&dim, eps, self.axis()),
            Preset::Custom => FSpec::new(m, self.f.terms.clone().unwrap_or_default())?,
        };
        Ok(f)
    }

    pub fn build_backend(&self) -> Result<Arc<dyn Backend>> {
        let dim = self.dimension()?;
        match self.backend {
            BackendKind::Axisym => {
                let k = axisym_nodes_for(&dim, self.band_limit);
                axisym_backend(&dim, k, self.band_limit, self.axis())
            }
            BackendKind::Full => full_backend(&dim, self.band_limit, self.oversample),
        }
    }
}
