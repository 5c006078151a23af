//! Builds a Moran construction and runs every check on it.

use multifrac::config::{read_potential, read_shift, ConfigFile};
use multifrac::moran::{run_moran_suite, BuildMode, MoranConfig, SuiteOptions};
use multifrac::Error;
use serde_json::json;

use super::{potential_json, read_psi, shift_json, Finished};
use crate::run::{CliError, Output, Settings};

pub fn run(cfg: &ConfigFile, settings: &Settings, out: &mut Output) -> Result<Finished, CliError> {
    cfg.check_sections(&["shift", "phi", "psi", "moran"])?;
    let space = read_shift(cfg)?;
    let phi = read_potential(cfg, "phi", &space)?;
    let psi = read_psi(cfg, &space)?;
    let mut f = cfg.fields("moran")?;
    let config = MoranConfig::read(&mut f)?;
    let defaults = SuiteOptions::default();
    let mode = match f.entry("mode")? {
        None => None,
        Some(e) => match e.value.as_str() {
            "auto" => None,
            "eager" => Some(BuildMode::Eager),
            "lazy" => Some(BuildMode::Lazy),
            other => {
                return Err(Error::config(e.line, format!("mode {other:?} is not auto, eager or lazy")).into());
            }
        },
    };
    let options = SuiteOptions {
        mode,
        samples: f.get_or("samples", defaults.samples)?,
        balls: f.get_or("balls", defaults.balls)?,
        slack_factor: f.get_or("slack_factor", defaults.slack_factor)?,
        seed: settings.seed,
    };
    f.finish()?;

    let report = run_moran_suite(&space, &phi, &psi, &config, &options)?;
    out.json("moran.json", &report)?;

    let mut failures = Vec::new();
    for g in report.growth.iter().filter(|g| !g.pass) {
        failures.push(format!("family growth fails at level {}", g.level));
    }
    if !report.separation.pass {
        failures.push("separation or nesting check failed".into());
    }
    if !report.convergence.pass {
        failures.push("level-convergence check failed".into());
    }
    if !report.pdp.pass {
        failures.push(format!(
            "mass distribution fit log K = {} exceeds its bound {}",
            report.pdp.log_k, report.pdp.log_k_limit
        ));
    }
    let resolved = json!({
        "shift": shift_json(&space),
        "phi": potential_json(&phi),
        "psi": potential_json(&psi),
        "moran": config,
        "suite": options,
    });
    Ok(Finished { resolved, failures })
}
