//! Topological pressure from the transfer operator and from word counts.

use multifrac::config::{read_potential, read_shift, ConfigFile};
use multifrac::thermo::{counting_pressure, transfer_pressure, DEFAULT_MAX_N};
use serde_json::json;

use super::{potential_json, read_n_range, shift_json, Finished};
use crate::run::{CliError, Output, Settings};

pub const DEFAULT_TOL: f64 = 1e-3;

pub fn run(cfg: &ConfigFile, settings: &Settings, out: &mut Output) -> Result<Finished, CliError> {
    cfg.check_sections(&["shift", "potential", "pressure"])?;
    let space = read_shift(cfg)?;
    let pot = read_potential(cfg, "potential", &space)?;
    let (n_range, tol) = match cfg.optional_fields("pressure") {
        Some(mut f) => {
            let n = read_n_range(&mut f, settings, 20, DEFAULT_MAX_N)?;
            let tol = f.get_or("tol", DEFAULT_TOL)?;
            f.finish()?;
            (n, tol)
        }
        None => (
            multifrac::thermo::NRange::new(8, settings.nmax.unwrap_or(20))?,
            DEFAULT_TOL,
        ),
    };
    let tol = settings.tol.unwrap_or(tol);

    let transfer = transfer_pressure(&space, &pot)?;
    let counting = counting_pressure(&space, &pot, n_range)?;
    let difference = (counting.value - transfer).abs();
    let agree = difference <= tol;
    let resolved = json!({
        "shift": shift_json(&space),
        "potential": potential_json(&pot),
        "pressure": { "n_min": n_range.min, "n_max": n_range.max, "tol": tol },
    });
    out.json(
        "pressure.json",
        &json!({
            "value": transfer,
            "transfer_pressure": transfer,
            "counting_pressure": counting,
            "difference": difference,
            "tol": tol,
            "agree": agree,
        }),
    )?;
    let failures = if agree {
        Vec::new()
    } else {
        vec![format!(
            "counting pressure {} differs from transfer pressure {transfer} by {difference} > {tol}",
            counting.value
        )]
    };
    Ok(Finished { resolved, failures })
}
