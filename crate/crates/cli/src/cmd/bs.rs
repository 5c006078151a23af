//! Dimension as the zero of `s ↦ P(−sψ)`.

use multifrac::config::{read_potential, read_shift, ConfigFile};
use multifrac::thermo::{bs_dimension, BsTarget};
use multifrac::Error;
use serde_json::json;

use super::{potential_json, shift_json, Finished};
use crate::run::{CliError, Output, Settings};

pub fn run(cfg: &ConfigFile, _settings: &Settings, out: &mut Output) -> Result<Finished, CliError> {
    cfg.check_sections(&["shift", "phi", "psi", "bs"])?;
    let space = read_shift(cfg)?;
    let psi = read_potential(cfg, "psi", &space)?;
    let (level, alpha) = match cfg.optional_fields("bs") {
        None => (false, None),
        Some(mut f) => {
            let target: String = f.get_or("target", "whole".to_string())?;
            let level = match target.as_str() {
                "whole" => false,
                "level" => true,
                other => return Err(f.error(format!("target {other:?} is not whole or level")).into()),
            };
            let alpha: Option<f64> = f.get("alpha")?;
            if level && alpha.is_none() {
                return Err(f.error("target = level needs `alpha`").into());
            }
            if !level && alpha.is_some() {
                return Err(f.error("`alpha` only applies to target = level").into());
            }
            f.finish()?;
            (level, alpha)
        }
    };
    let phi = if level {
        Some(read_potential(cfg, "phi", &space)?)
    } else {
        if let Some(s) = cfg.section("phi") {
            return Err(Error::config(s.line, "[phi] is only read for target = level").into());
        }
        None
    };
    let target = match (&phi, alpha) {
        (Some(phi), Some(alpha)) => BsTarget::Level { phi, alpha },
        _ => BsTarget::WholeSpace,
    };
    let result = bs_dimension(&space, &target, &psi)?;
    out.json(
        "bs.json",
        &json!({
            "target": if level { "level" } else { "whole" },
            "alpha": alpha,
            "dimension": result.dimension,
            "residual": result.residual,
            "iterations": result.iterations,
        }),
    )?;
    let resolved = json!({
        "shift": shift_json(&space),
        "psi": potential_json(&psi),
        "phi": phi.as_ref().map(potential_json),
        "bs": { "target": if level { "level" } else { "whole" }, "alpha": alpha },
    });
    Ok(Finished {
        resolved,
        failures: Vec::new(),
    })
}
