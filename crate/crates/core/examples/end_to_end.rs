//! Check, solve and recheck the default configuration, writing reports to a
//! temporary directory.

use qcurv::pipeline::{cmd_check, cmd_recheck, cmd_solve, RunConfig};

fn main() -> qcurv::Result<()> {
    let dir = std::env::temp_dir().join("qcurv-end-to-end");
    let cfg = RunConfig { out: dir.clone(), ..RunConfig::default() };
    let (h, _) = cmd_check(&cfg)?;
    println!("H1 {} H2 {} H3 {}", h.h1.pass, h.h2.pass, h.h3.pass);
    let (cert, outcome) = cmd_solve(&cfg, false)?;
    if let Some(c) = cert {
        println!("{}: |Lambda| = {:.3e}, residual = {:.3e}, min u = {:.6}", c.status, c.lambda_norm, c.residual_sup, c.min_u);
    }
    let (re, _) = cmd_recheck(&dir.join("certificate.json"))?;
    println!("recheck residual {:.3e}, sound {}", re.recomputed_residual_sup, re.sound);
    println!("exit code {}, reports in {}", outcome.exit_code(), dir.display());
    Ok(())
}
