//! The subcommands: constants, check, solve, probe and recheck.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::degree::{
    alignment_check, brouwer_degree, center_grid, decay_fit, euler_sum, find_lambda_zero, g_map,
    morse_analysis, morse_sum, nondegeneracy_probe, DegreeOpts, DegreeReport, MorseData, MorseOpts, ZeroOpts,
};
use crate::error::{Error, Result};
use crate::fspec::FSpec;
use crate::functionals::{aubin_probe, check_compatible, kw_residual, pde_residual};
use crate::geometry::{pullback_t, BallParam, Dimension, SpherePoint};
use crate::reduction::optimizer::OptimOptions;
use crate::reduction::{solve_reduced, ReduceOpts, ReducedSolution};
use crate::spectral::{Backend, Field};

use super::config::{BackendKind, RunConfig};
use super::report::{config_hash, write_csv, write_json, SCHEMA_VERSION};

/// Process outcome, mapped to the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    HypothesisFail,
    SolverBudget,
    GateFail,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::HypothesisFail => 2,
            Outcome::SolverBudget => 3,
            Outcome::GateFail => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
}

fn provenance(cfg: &RunConfig, command: &str) -> Result<Provenance> {
    Ok(Provenance {
        schema_version: SCHEMA_VERSION,
        tool: "qcurv".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config_hash: config_hash(cfg)?,
    })
}

fn reduce_opts(cfg: &RunConfig) -> ReduceOpts {
    ReduceOpts {
        optim: OptimOptions { tol: cfg.tolerances.solver, ..OptimOptions::default() },
        resolution_c: cfg.tolerances.resolution_c,
        ..ReduceOpts::default()
    }
}

// ---------------------------------------------------------------- constants

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsRow {
    pub n: usize,
    pub c_n: f64,
    pub d_n: f64,
    pub f0: f64,
    pub two_sharp: f64,
    pub omega_n: f64,
    pub k0_raw: f64,
    pub k0_inv_scaled: f64,
    /// `d_n = (n-4) f0 / 2`
    pub d_n_identity: bool,
    /// `|K0^{-1} omega^{-4/n} - d_n| / d_n < 1e-9`
    pub k0_identity: bool,
    /// Degree-1 symbol equals `(n+4)(n+2)n(n-2)/16`.
    pub symbol_identity: bool,
}

pub fn constants_row(n: usize) -> Result<ConstantsRow> {
    let d = Dimension::new(n)?;
    let nf = n as f64;
    let p1 = (nf + 4.0) * (nf + 2.0) * nf * (nf - 2.0) / 16.0;
    Ok(ConstantsRow {
        n,
        c_n: d.c_n,
        d_n: d.d_n,
        f0: d.f0,
        two_sharp: d.two_sharp,
        omega_n: d.omega_n,
        k0_raw: d.k0_raw,
        k0_inv_scaled: d.k0_inv_scaled,
        d_n_identity: d.d_n == (nf - 4.0) * d.f0 / 2.0,
        k0_identity: ((d.k0_inv_scaled - d.d_n) / d.d_n).abs() < 1e-9,
        symbol_identity: ((d.paneitz_symbol(1, 1.0) - p1) / p1).abs() < 1e-14,
    })
}

pub fn cmd_constants(ns: &[usize]) -> Result<Vec<ConstantsRow>> {
    ns.iter().map(|&n| constants_row(n)).collect()
}

// ---------------------------------------------------------------- check

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H1Report {
    /// `|f - f0|_inf` over the grid nodes and the critical points of `f`.
    pub eps_f: f64,
    pub eps_rel: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorEntry {
    pub alpha: f64,
    pub floor: f64,
    pub floor_rel: f64,
    pub argmin_center: Vec<f64>,
    pub argmin_t: f64,
    pub per_t: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Report {
    pub floors: Vec<FloorEntry>,
    pub centers: usize,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroEntry {
    pub p: Vec<f64>,
    pub sign: i32,
    pub residual: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeSummary {
    pub t0: f64,
    pub degree: i64,
    pub zeros: Vec<ZeroEntry>,
    pub reliable: bool,
    pub starts: usize,
    pub boundary_min_norm: f64,
}

impl From<&DegreeReport> for DegreeSummary {
    fn from(r: &DegreeReport) -> Self {
        Self {
            t0: r.t0,
            degree: r.degree,
            zeros: r
                .zeros
                .iter()
                .map(|z| ZeroEntry { p: z.p.clone(), sign: z.sign, residual: z.residual, singular: z.singular })
                .collect(),
            reliable: r.reliable,
            starts: r.starts,
            boundary_min_norm: r.boundary.min_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalEntry {
    pub x: Vec<f64>,
    pub value: f64,
    pub index: usize,
    pub laplacian: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H3Report {
    pub degree: Option<DegreeSummary>,
    /// Degree with a start cloud four times larger.
    pub degree_refined: Option<i64>,
    /// Degree at `1.1 t0`.
    pub degree_perturbed: Option<i64>,
    pub stable: bool,
    pub error: Option<String>,
    pub morse_sum: i64,
    pub euler_sum: i64,
    pub euler_expected: i64,
    pub morse_degenerate: bool,
    /// `morse_sum != -1`
    pub morse_condition: bool,
    pub critical_points: Vec<CriticalEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub provenance: Provenance,
    pub config: RunConfig,
    pub h1: H1Report,
    pub h2: H2Report,
    pub h3: H3Report,
    pub kw_warning: Option<String>,
    pub caveats: Vec<String>,
    pub pass: bool,
}

impl HypothesisReport {
    pub fn outcome(&self) -> Outcome {
        if self.pass {
            Outcome::Pass
        } else {
            Outcome::HypothesisFail
        }
    }
}

/// Warning text when `f - avg f` is a pure first harmonic.
pub fn kw_warning(f: &FSpec) -> Option<String> {
    let (_, h, rest) = f.harmonic_split();
    let linear = h.iter().any(|v| v.abs() > 0.0);
    (linear && rest.abs() < 1e-14).then(|| {
        "f - mean(f) is a first spherical harmonic: the Kazdan-Warner identity rules out positive solutions".into()
    })
}

fn h1_check(cfg: &RunConfig, dim: &Dimension, f: &FSpec, backend: &dyn Backend, morse: &MorseData) -> H1Report {
    let nodes = (0..backend.n_nodes()).map(|k| f.eval(backend.node(k)));
    let crit = morse.points.iter().map(|p| p.value);
    let eps_f = nodes.chain(crit).map(|v| (v - dim.f0).abs()).fold(0.0, f64::max);
    let eps_rel = eps_f / dim.f0;
    H1Report { eps_f, eps_rel, threshold: cfg.tolerances.h1_max, pass: eps_rel <= cfg.tolerances.h1_max }
}

fn h2_check(cfg: &RunConfig, dim: &Dimension, f: &FSpec, morse: &MorseData) -> Result<H2Report> {
    let mut centers = center_grid(dim.ambient(), cfg.probe.extra_centers, cfg.seed);
    for p in &morse.points {
        centers.push(SpherePoint::normalized(p.x.clone())?);
    }
    let mut floors = Vec::new();
    for &alpha in &cfg.probe.alpha {
        let r = nondegeneracy_probe(f, alpha, &cfg.probe.t_grid, &centers)?;
        floors.push(FloorEntry {
            alpha,
            floor: r.floor,
            floor_rel: r.floor / dim.f0,
            argmin_center: r.argmin_center,
            argmin_t: r.argmin_t,
            per_t: r.per_t.iter().map(|&(t, v)| [t, v]).collect(),
        });
    }
    let threshold = cfg.tolerances.h2_floor_min;
    // Order 2 is the order delivered by the two-term expansion at Morse points.
    let pass = floors.iter().any(|e| (e.alpha - 2.0).abs() < 1e-12 && e.floor_rel > threshold);
    Ok(H2Report { floors, centers: centers.len(), threshold, pass })
}

fn degree_of_g(f: &FSpec, m: usize, t0: f64, opts: &DegreeOpts) -> Result<DegreeReport> {
    let map = |p: &[f64]| -> Result<Vec<f64>> { Ok(g_map(&BallParam::new(p.to_vec())?, f)) };
    brouwer_degree(&map, m, t0, "G", opts)
}

fn h3_check(cfg: &RunConfig, dim: &Dimension, f: &FSpec, morse: &MorseData) -> H3Report {
    let m = dim.ambient();
    let opts = DegreeOpts { starts: cfg.probe.degree_starts, seed: cfg.seed, dedupe: cfg.tolerances.dedupe, ..DegreeOpts::default() };
    let base = degree_of_g(f, m, cfg.t0, &opts);
    let refined = degree_of_g(f, m, cfg.t0, &DegreeOpts { starts: 4 * opts.starts, ..opts.clone() });
    let perturbed = degree_of_g(f, m, 1.1 * cfg.t0, &opts);
    let euler_expected = 1 + if dim.n % 2 == 0 { 1 } else { -1 };
    let ms = morse_sum(morse);
    let critical_points = morse
        .points
        .iter()
        .map(|p| CriticalEntry { x: p.x.clone(), value: p.value, index: p.index, laplacian: p.laplacian, degenerate: p.degenerate })
        .collect();
    let (degree, error) = match &base {
        Ok(r) => (Some(DegreeSummary::from(r)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let degree_refined = refined.as_ref().ok().map(|r| r.degree);
    let degree_perturbed = perturbed.as_ref().ok().map(|r| r.degree);
    let d0 = degree.as_ref().map(|d| d.degree);
    let stable = d0.is_some() && d0 == degree_refined && d0 == degree_perturbed;
    let pass = degree.as_ref().is_some_and(|d| d.degree != 0 && d.reliable) && stable;
    H3Report {
        degree,
        degree_refined,
        degree_perturbed,
        stable,
        error,
        morse_sum: ms,
        euler_sum: euler_sum(morse),
        euler_expected,
        morse_degenerate: morse.degenerate,
        morse_condition: ms != -1,
        critical_points,
        pass,
    }
}

/// H1 sup-norm, H2 nondegeneracy floors and H3 degree of `G` with the Morse count.
pub fn run_check(cfg: &RunConfig) -> Result<HypothesisReport> {
    let dim = cfg.dimension()?;
    let f = cfg.fspec()?;
    let backend = cfg.build_backend()?;
    let morse = morse_analysis(&f, &MorseOpts { seed: cfg.seed, dedupe: cfg.tolerances.dedupe, ..MorseOpts::default() });
    let h1 = h1_check(cfg, &dim, &f, backend.as_ref(), &morse);
    let h2 = h2_check(cfg, &dim, &f, &morse)?;
    let h3 = h3_check(cfg, &dim, &f, &morse);
    let mut caveats = Vec::new();
    if morse.degenerate {
        caveats.push("f has degenerate critical points: the Morse count is unreliable".to_string());
    }
    if h3.euler_sum != h3.euler_expected && !morse.degenerate {
        caveats.push(format!("Euler check failed: sum {} vs {}", h3.euler_sum, h3.euler_expected));
    }
    caveats.push(
        "the Morse count filter Delta_h f > 0 is applied with the geometer's sign; both the count and deg G are reported"
            .to_string(),
    );
    let kw = kw_warning(&f);
    let pass = h1.pass && h2.pass && h3.pass;
    Ok(HypothesisReport { provenance: provenance(cfg, "check")?, config: cfg.clone(), h1, h2, h3, kw_warning: kw, caveats, pass })
}

pub fn cmd_check(cfg: &RunConfig) -> Result<(HypothesisReport, Outcome)> {
    let report = run_check(cfg)?;
    write_json(&cfg.out.join("hypothesis.json"), &report)?;
    let outcome = report.outcome();
    Ok((report, outcome))
}

// ---------------------------------------------------------------- solve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Gate {
    fn below(value: f64, threshold: f64) -> Self {
        Self { value, threshold, pass: value.is_finite() && value < threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gates {
    pub lambda: Gate,
    pub residual: Gate,
    /// `value` is `min u`; passes when positive.
    pub positivity: Gate,
    pub kw: Gate,
}

impl Gates {
    pub fn all_pass(&self) -> bool {
        self.lambda.pass && self.residual.pass && self.positivity.pass && self.kw.pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub found: bool,
    pub evaluations: usize,
    pub brackets: usize,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSummary {
    pub m_p: f64,
    pub el_residual: f64,
    pub nodal_defect: f64,
    pub kkt_residual: f64,
    pub constraint_violation: f64,
    pub convexity: Option<f64>,
    pub dist_to_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCertificate {
    pub provenance: Provenance,
    pub config: RunConfig,
    /// `certified`, `no certified solution` or `solver budget exhausted`.
    pub status: String,
    pub search: SearchSummary,
    pub p_star: Option<Vec<f64>>,
    pub t_star: Option<f64>,
    /// `zero` when the search met its tolerance, `closest` for the best sweep point.
    pub candidate: Option<String>,
    pub lambda: Vec<f64>,
    pub lambda_norm: f64,
    pub reduced: Option<ReducedSummary>,
    /// Coefficients of the reconstructed `u = T_{phi^{-1}} uhat` on the backend basis.
    pub u_coeffs: Vec<f64>,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub min_u: f64,
    pub kw_residual: Vec<f64>,
    pub gates: Option<Gates>,
    pub pass: bool,
}

impl SolutionCertificate {
    pub fn outcome(&self) -> Outcome {
        match (&self.gates, self.pass) {
            (_, true) => Outcome::Pass,
            (None, false) => Outcome::SolverBudget,
            (Some(_), false) => Outcome::GateFail,
        }
    }
}

/// `u = T_{phi_p^{-1}} uhat`, projected onto the backend's band.
pub fn reconstruct(sol: &ReducedSolution) -> Field {
    let uhat = sol.renormalized();
    if sol.p.is_identity() {
        return uhat;
    }
    let b = uhat.backend().clone();
    let inv = sol.p.inverse();
    let g = pullback_t(&inv, |y: &[f64]| uhat.eval(y));
    Field::from_fn(&b, g)
}

fn certificate_for(
    cfg: &RunConfig,
    f: &FSpec,
    sol: &ReducedSolution,
    candidate: &str,
    search: SearchSummary,
) -> Result<SolutionCertificate> {
    let tol = &cfg.tolerances;
    let u = reconstruct(sol);
    let res = pde_residual(&u, f);
    let min_u = u.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let kw = kw_residual(&u, f);
    let kw_inf = kw.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let lambda_norm = sol.multiplier_norm();
    let gates = Gates {
        lambda: Gate::below(lambda_norm, tol.lambda_gate),
        residual: Gate::below(res.sup, tol.residual_gate),
        positivity: Gate { value: min_u, threshold: 0.0, pass: min_u > 0.0 },
        kw: Gate::below(kw_inf, tol.kw_gate),
    };
    let pass = gates.all_pass();
    Ok(SolutionCertificate {
        provenance: provenance(cfg, "solve")?,
        config: cfg.clone(),
        status: if pass { "certified" } else { "no certified solution" }.into(),
        search,
        p_star: Some(sol.p.coords().to_vec()),
        t_star: Some(sol.p.t()),
        candidate: Some(candidate.into()),
        lambda: sol.multipliers.clone(),
        lambda_norm,
        reduced: Some(ReducedSummary {
            m_p: sol.m_p,
            el_residual: sol.el_residual,
            nodal_defect: sol.nodal_defect,
            kkt_residual: sol.kkt_residual,
            constraint_violation: sol.constraint_violation,
            convexity: sol.convexity,
            dist_to_constant: sol.dist_to_constant,
        }),
        u_coeffs: u.coeffs().to_vec(),
        residual_sup: res.sup,
        residual_l2: res.l2,
        min_u,
        kw_residual: kw,
        gates: Some(gates),
        pass,
    })
}

/// Outputs of one solve: the certificate and the sweep table `(p, Lambda)`.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub certificate: SolutionCertificate,
    pub sweep: Vec<(Vec<f64>, Vec<f64>)>,
    pub field: Option<Field>,
}

/// Zero search, reconstruction and gates, without writing files.
pub fn run_solve(cfg: &RunConfig) -> Result<SolveRun> {
    let f = cfg.fspec()?;
    let backend = cfg.build_backend()?;
    check_compatible(backend.as_ref(), &f)?;
    let opts = ZeroOpts {
        reduce: reduce_opts(cfg),
        tol: cfg.tolerances.zero_search,
        sweep_points: cfg.probe.sweep_points,
        ..ZeroOpts::default()
    };
    let search = match find_lambda_zero(&backend, &f, cfg.t0, &opts) {
        Ok(s) => s,
        Err(e @ Error::NoConvergence { .. }) | Err(e @ Error::InvalidArgument(_)) => {
            let certificate = SolutionCertificate {
                provenance: provenance(cfg, "solve")?,
                config: cfg.clone(),
                status: "solver budget exhausted".into(),
                search: SearchSummary { found: false, evaluations: 0, brackets: 0, note: e.to_string() },
                p_star: None,
                t_star: None,
                candidate: None,
                lambda: Vec::new(),
                lambda_norm: f64::NAN,
                reduced: None,
                u_coeffs: Vec::new(),
                residual_sup: f64::NAN,
                residual_l2: f64::NAN,
                min_u: f64::NAN,
                kw_residual: Vec::new(),
                gates: None,
                pass: false,
            };
            return Ok(SolveRun { certificate, sweep: Vec::new(), field: None });
        }
        Err(e) => return Err(e),
    };
    let summary = SearchSummary {
        found: search.solution.is_some(),
        evaluations: search.evaluations,
        brackets: search.brackets,
        note: search.note.clone(),
    };
    let (sol, candidate) = match search.solution.clone() {
        Some(s) => (s, "zero"),
        None => {
            // Best available candidate, so the gates can say why it is not a solution.
            let origin = (vec![0.0; backend.dim().ambient()], vec![f64::INFINITY]);
            let best = search
                .sweep
                .iter()
                .chain(std::iter::once(&origin))
                .min_by(|a, b| crate::geometry::norm(&a.1).partial_cmp(&crate::geometry::norm(&b.1)).unwrap())
                .map(|e| e.0.clone())
                .unwrap_or_else(|| origin.0.clone());
            (solve_reduced(&backend, &BallParam::new(best)?, &f, &opts.reduce, None)?, "closest")
        }
    };
    let certificate = certificate_for(cfg, &f, &sol, candidate, summary)?;
    let field = reconstruct(&sol);
    Ok(SolveRun { certificate, sweep: search.sweep, field: Some(field) })
}

pub fn write_solve_outputs(cfg: &RunConfig, run: &SolveRun) -> Result<()> {
    write_json(&cfg.out.join("certificate.json"), &run.certificate)?;
    if let Some(u) = &run.field {
        let b = u.backend();
        let m = b.dim().ambient();
        let mut header: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
        header.push("weight".into());
        header.push("u".into());
        let rows: Vec<Vec<f64>> = (0..b.n_nodes())
            .map(|k| {
                let mut r = b.node(k).to_vec();
                r.push(b.weights()[k]);
                r.push(u.values()[k]);
                r
            })
            .collect();
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(&cfg.out.join("field.csv"), &h, &rows)?;
    }
    if !run.sweep.is_empty() {
        let m = run.sweep[0].0.len();
        let mut header: Vec<String> = (1..=m).map(|i| format!("p{i}")).collect();
        header.extend((1..=m).map(|i| format!("lambda{i}")));
        header.push("lambda_norm".into());
        let rows: Vec<Vec<f64>> = run
            .sweep
            .iter()
            .map(|(p, l)| {
                let mut r = p.clone();
                r.extend(l);
                r.push(crate::geometry::norm(l));
                r
            })
            .collect();
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(&cfg.out.join("sweep.csv"), &h, &rows)?;
    }
    Ok(())
}

/// Runs the hypothesis check first unless `force`; a failed check stops with exit 2.
pub fn cmd_solve(cfg: &RunConfig, force: bool) -> Result<(Option<SolutionCertificate>, Outcome)> {
    if !force {
        let (report, outcome) = cmd_check(cfg)?;
        if !report.pass {
            return Ok((None, outcome));
        }
    }
    let run = run_solve(cfg)?;
    write_solve_outputs(cfg, &run)?;
    let outcome = run.certificate.outcome();
    Ok((Some(run.certificate), outcome))
}

// ---------------------------------------------------------------- recheck

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecheckReport {
    pub provenance: Provenance,
    pub certificate: PathBuf,
    pub stored_pass: bool,
    pub stored_residual_sup: f64,
    pub recomputed_residual_sup: f64,
    pub recomputed_min_u: f64,
    pub residual_gate: f64,
    /// False when a stored pass is contradicted by the recomputed residual.
    pub sound: bool,
}

/// Rebuild the stored field and re-evaluate the residual gate.
pub fn cmd_recheck(path: &Path) -> Result<(RecheckReport, Outcome)> {
    let text = std::fs::read_to_string(path)?;
    let cert: SolutionCertificate = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let cfg = cert.config.clone();
    let backend = cfg.build_backend()?;
    if cert.u_coeffs.len() != backend.n_modes() {
        return Err(Error::Config(format!(
            "certificate stores {} coefficients, backend has {} modes",
            cert.u_coeffs.len(),
            backend.n_modes()
        )));
    }
    let f = cfg.fspec()?;
    let u = Field::from_coeffs(&backend, cert.u_coeffs.clone());
    let res = pde_residual(&u, &f);
    let min_u = u.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let gate = cfg.tolerances.residual_gate;
    let sound = !cert.pass || (res.sup < gate && min_u > 0.0);
    let report = RecheckReport {
        provenance: provenance(&cfg, "recheck")?,
        certificate: path.to_path_buf(),
        stored_pass: cert.pass,
        stored_residual_sup: cert.residual_sup,
        recomputed_residual_sup: res.sup,
        recomputed_min_u: min_u,
        residual_gate: gate,
        sound,
    };
    write_json(&cfg.out.join("recheck.json"), &report)?;
    Ok((report, if sound { Outcome::Pass } else { Outcome::GateFail }))
}

// ---------------------------------------------------------------- probes

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    Aubin,
    Sobolev,
    Gmap,
    Decay,
    Alignment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientProbeReport {
    pub provenance: Provenance,
    pub a: f64,
    pub q: f64,
    pub d_n: f64,
    pub best: f64,
    pub starts: usize,
    pub converged: usize,
    /// `best >= d_n - 1e-3`
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmapProbeReport {
    pub provenance: Provenance,
    pub floors: Vec<FloorEntry>,
    pub rows: usize,
    pub max_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProbeReport {
    pub provenance: Provenance,
    pub center: Vec<f64>,
    pub t: Vec<f64>,
    pub g_norm: Vec<f64>,
    pub f_dev_l2sq: Vec<f64>,
    pub a_minus_g1: Vec<f64>,
    pub slope_g: f64,
    pub slope_f_dev: f64,
    pub slope_a_minus_g1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentProbeReport {
    pub provenance: Provenance,
    pub samples: usize,
    pub fraction_positive: f64,
    pub min_dot: f64,
    pub min_cosine: f64,
    pub homotopy: Vec<[f64; 2]>,
    pub pass: bool,
}

/// Centers used by the alignment and decay probes: `+-e_axis` on the axisymmetric
/// backend, `+-e_i` otherwise.
fn probe_centers(cfg: &RunConfig, backend: &Arc<dyn Backend>) -> Vec<SpherePoint> {
    let m = backend.dim().ambient();
    match backend.symmetry_axis() {
        Some(a) => vec![SpherePoint::pole(m, a), SpherePoint::pole(m, a).antipode()],
        None => center_grid(m, 0, cfg.seed),
    }
}

fn quotient_probe(cfg: &RunConfig, a: f64, name: &str) -> Result<QuotientProbeReport> {
    let backend = cfg.build_backend()?;
    let dim = backend.dim().clone();
    let r = aubin_probe(&backend, a, dim.two_sharp, cfg.probe.aubin_starts, cfg.seed)?;
    let rows: Vec<Vec<f64>> = r
        .starts
        .iter()
        .enumerate()
        .map(|(i, s)| vec![i as f64, s.value, f64::from(u8::from(s.converged)), f64::from(u8::from(s.feasible))])
        .collect();
    write_csv(&cfg.out.join(format!("{name}_starts.csv")), &["start", "value", "converged", "feasible"], &rows)?;
    Ok(QuotientProbeReport {
        provenance: provenance(cfg, &format!("probe {name}"))?,
        a,
        q: dim.two_sharp,
        d_n: dim.d_n,
        best: r.best,
        starts: r.starts.len(),
        converged: r.starts.iter().filter(|s| s.converged).count(),
        pass: r.best >= dim.d_n - 1e-3,
    })
}

fn gmap_probe(cfg: &RunConfig) -> Result<GmapProbeReport> {
    let dim = cfg.dimension()?;
    let f = cfg.fspec()?;
    let m = dim.ambient();
    let centers = center_grid(m, cfg.probe.extra_centers, cfg.seed);
    let mut rows = Vec::new();
    let mut max_norm: f64 = 0.0;
    for c in &centers {
        for &t in &cfg.probe.t_grid {
            let g = g_map(&BallParam::from_center(c, t)?, &f);
            let gn = crate::geometry::norm(&g);
            max_norm = max_norm.max(gn);
            let mut r = c.coords().to_vec();
            r.push(t);
            r.push(gn);
            r.extend(cfg.probe.alpha.iter().map(|a| gn * t.powf(*a)));
            r.extend(g);
            rows.push(r);
        }
    }
    let mut header: Vec<String> = (1..=m).map(|i| format!("P{i}")).collect();
    header.push("t".into());
    header.push("g_norm".into());
    header.extend(cfg.probe.alpha.iter().map(|a| format!("t^{a}*g_norm")));
    header.extend((1..=m).map(|i| format!("G{i}")));
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&cfg.out.join("gmap.csv"), &h, &rows)?;
    let morse = MorseData { points: Vec::new(), margin: 0.0, degenerate: false };
    let h2 = h2_check(cfg, &dim, &f, &morse)?;
    Ok(GmapProbeReport { provenance: provenance(cfg, "probe gmap")?, floors: h2.floors, rows: rows.len(), max_norm })
}

fn decay_probe(cfg: &RunConfig) -> Result<DecayProbeReport> {
    let backend = cfg.build_backend()?;
    let f = cfg.fspec()?;
    let center = probe_centers(cfg, &backend).remove(0);
    let d = decay_fit(&backend, &f, &center, &cfg.probe.decay_t, &reduce_opts(cfg))?;
    let rows: Vec<Vec<f64>> = (0..d.t.len()).map(|i| vec![d.t[i], d.g_norm[i], d.f_dev_l2sq[i], d.a_minus_g1[i]]).collect();
    write_csv(&cfg.out.join("decay.csv"), &["t", "g_norm", "f_dev_l2sq", "a_minus_g1"], &rows)?;
    Ok(DecayProbeReport {
        provenance: provenance(cfg, "probe decay")?,
        center: center.into_vec(),
        t: d.t,
        g_norm: d.g_norm,
        f_dev_l2sq: d.f_dev_l2sq,
        a_minus_g1: d.a_minus_g1,
        slope_g: d.slope_g,
        slope_f_dev: d.slope_f_dev,
        slope_a_minus_g1: d.slope_a_minus_g1,
    })
}

fn alignment_probe(cfg: &RunConfig) -> Result<AlignmentProbeReport> {
    let backend = cfg.build_backend()?;
    let f = cfg.fspec()?;
    let mut points = Vec::new();
    for c in probe_centers(cfg, &backend) {
        for &t in &cfg.probe.alignment_t {
            points.push(BallParam::from_center(&c, t)?);
        }
    }
    let r = alignment_check(&backend, &f, &points, &reduce_opts(cfg))?;
    let m = backend.dim().ambient();
    let rows: Vec<Vec<f64>> = r
        .samples
        .iter()
        .map(|s| {
            let mut row = s.p.clone();
            row.push(s.t);
            row.push(s.dot);
            row.push(s.cosine);
            row
        })
        .collect();
    let mut header: Vec<String> = (1..=m).map(|i| format!("p{i}")).collect();
    header.extend(["t".to_string(), "g_dot_a".to_string(), "cosine".to_string()]);
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&cfg.out.join("alignment.csv"), &h, &rows)?;
    Ok(AlignmentProbeReport {
        provenance: provenance(cfg, "probe alignment")?,
        samples: r.samples.len(),
        fraction_positive: r.fraction_positive,
        min_dot: r.min_dot,
        min_cosine: r.min_cosine,
        homotopy: r.homotopy.iter().map(|&(a, b)| [a, b]).collect(),
        pass: r.fraction_positive == 1.0,
    })
}

/// Runs one probe and writes `<probe>.json` plus its CSV table into `cfg.out`.
pub fn cmd_probe(cfg: &RunConfig, which: ProbeKind) -> Result<(serde_json::Value, Outcome)> {
    let to_value = |v: serde_json::Result<serde_json::Value>| v.map_err(|e| Error::Config(e.to_string()));
    let (name, value, pass) = match which {
        ProbeKind::Aubin => {
            let r = quotient_probe(cfg, cfg.probe.aubin_a, "aubin")?;
            ("aubin", to_value(serde_json::to_value(&r))?, r.pass)
        }
        ProbeKind::Sobolev => {
            let r = quotient_probe(cfg, 1.0, "sobolev")?;
            ("sobolev", to_value(serde_json::to_value(&r))?, r.pass)
        }
        ProbeKind::Gmap => {
            let r = gmap_probe(cfg)?;
            ("gmap", to_value(serde_json::to_value(&r))?, true)
        }
        ProbeKind::Decay => {
            let r = decay_probe(cfg)?;
            ("decay", to_value(serde_json::to_value(&r))?, true)
        }
        ProbeKind::Alignment => {
            let r = alignment_probe(cfg)?;
            ("alignment", to_value(serde_json::to_value(&r))?, r.pass)
        }
    };
    write_json(&cfg.out.join(format!("{name}.json")), &value)?;
    Ok((value, if pass { Outcome::Pass } else { Outcome::GateFail }))
}

/// Whether the configured backend is the axisymmetric one.
pub fn is_axisym(cfg: &RunConfig) -> bool {
    cfg.backend == BackendKind::Axisym
}
