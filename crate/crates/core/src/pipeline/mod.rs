//! Configuration, commands and deterministic reports.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{
    cmd_check, cmd_constants, cmd_probe, cmd_recheck, cmd_solve, run_check, run_solve, HypothesisReport, Outcome,
    ProbeKind, SolutionCertificate,
};
pub use config::{BackendKind, Overrides, Preset, RunConfig};
