use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use qcurv::pipeline::report::canonical_json;
use qcurv::pipeline::{cmd_check, cmd_constants, cmd_probe, cmd_recheck, cmd_solve, BackendKind, Overrides, Preset, ProbeKind, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "qcurv", version, about = "Q-curvature reduction laboratory on S^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print dimension constants and identity checks.
    Constants {
        #[arg(long, value_delimiter = ',', default_values_t = vec![5usize, 6, 8])]
        n: Vec<usize>,
    },
    /// Check the hypotheses H1-H3 for the configured f.
    Check(RunArgs),
    /// Find a zero of the multiplier field and certify the reconstructed solution.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Skip the hypothesis check.
        #[arg(long)]
        force: bool,
    },
    /// Run one empirical probe.
    Probe {
        #[arg(value_enum)]
        which: ProbeArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-evaluate the residual gate of a stored certificate.
    Recheck { certificate: PathBuf },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML or JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long = "L")]
    band_limit: Option<usize>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BackendArg {
    Axisym,
    Full,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PresetArg {
    Constant,
    Kw,
    AxisymQuadratic,
    GenericQuadratic,
    ZonalCubic,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ProbeArg {
    Aubin,
    Sobolev,
    Gmap,
    Decay,
    Alignment,
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => RunConfig::default(),
        };
        let o = Overrides {
            n: self.n,
            backend: self.backend.map(|b| match b {
                BackendArg::Axisym => BackendKind::Axisym,
                BackendArg::Full => BackendKind::Full,
            }),
            band_limit: self.band_limit,
            t0: self.t0,
            eps: self.eps,
            seed: self.seed,
            out: self.out.clone(),
            preset: self.preset.map(|p| match p {
                PresetArg::Constant => Preset::Constant,
                PresetArg::Kw => Preset::Kw,
                PresetArg::AxisymQuadratic => Preset::AxisymQuadratic,
                PresetArg::GenericQuadratic => Preset::GenericQuadratic,
                PresetArg::ZonalCubic => Preset::ZonalCubic,
            }),
        };
        Ok(base.apply(&o)?)
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let code = match cli.command {
        Command::Constants { n } => {
            let rows = cmd_constants(&n)?;
            print!("{}", canonical_json(&rows)?);
            0
        }
        Command::Check(args) => {
            let (report, outcome) = cmd_check(&args.config()?)?;
            eprintln!("H1 {} H2 {} H3 {}", report.h1.pass, report.h2.pass, report.h3.pass);
            if let Some(w) = &report.kw_warning {
                eprintln!("warning: {w}");
            }
            outcome.exit_code()
        }
        Command::Solve { run, force } => {
            let (cert, outcome) = cmd_solve(&run.config()?, force)?;
            match cert {
                Some(c) => eprintln!("{} (|Lambda| = {:.3e}, residual = {:.3e})", c.status, c.lambda_norm, c.residual_sup),
                None => eprintln!("hypothesis check failed; rerun with --force to solve anyway"),
            }
            outcome.exit_code()
        }
        Command::Probe { which, run } => {
            let kind = match which {
                ProbeArg::Aubin => ProbeKind::Aubin,
                ProbeArg::Sobolev => ProbeKind::Sobolev,
                ProbeArg::Gmap => ProbeKind::Gmap,
                ProbeArg::Decay => ProbeKind::Decay,
                ProbeArg::Alignment => ProbeKind::Alignment,
            };
            let (_, outcome) = cmd_probe(&run.config()?, kind)?;
            outcome.exit_code()
        }
        Command::Recheck { certificate } => {
            let (report, outcome) = cmd_recheck(&certificate)?;
            eprintln!("stored pass {} recomputed residual {:.3e} sound {}", report.stored_pass, report.recomputed_residual_sup, report.sound);
            outcome.exit_code()
        }
    };
    Ok(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
