//! One module per subcommand, plus the readers they share.

pub mod bs;
pub mod gap;
pub mod maps;
pub mod moran;
pub mod pressure;
pub mod spectrum;

use multifrac::config::{read_potential, ConfigFile, Fields};
use multifrac::smooth::Observable;
use multifrac::symbolic::{Potential, ShiftSpace};
use multifrac::thermo::{DeltaSchedule, NRange};
use multifrac::{Error, Result};
use serde_json::{json, Value};

use crate::run::{CliError, Output, Settings};

/// What a command hands back to `main`: its resolved parameters and any
/// failed checks (which turn into exit code 3).
pub struct Finished {
    pub resolved: Value,
    pub failures: Vec<String>,
}

pub type CommandFn = fn(&ConfigFile, &Settings, &mut Output) -> std::result::Result<Finished, CliError>;

/// `[psi]` if present, the zero potential otherwise.
pub fn read_psi(cfg: &ConfigFile, space: &ShiftSpace) -> Result<Potential> {
    if cfg.section("psi").is_some() {
        read_potential(cfg, "psi", space)
    } else {
        Ok(Potential::constant(space, 0.0))
    }
}

pub fn shift_json(space: &ShiftSpace) -> Value {
    let rows: Vec<String> = space
        .matrix()
        .iter()
        .map(|r| r.iter().map(|&x| if x > 0 { '1' } else { '0' }).collect())
        .collect();
    json!({ "alphabet": space.alphabet_size(), "rows": rows })
}

pub fn potential_json(pot: &Potential) -> Value {
    json!({ "memory": pot.memory(), "table": pot.table() })
}

/// `alphas = a, b, …` or `grid = start:stop:step`.
pub fn read_alphas(f: &mut Fields<'_>) -> Result<Vec<f64>> {
    let list: Option<Vec<f64>> = f.list("alphas")?;
    let grid = f.entry("grid")?;
    let alphas = match (list, grid) {
        (Some(a), None) => a,
        (None, Some(e)) => {
            let parts: Vec<f64> = e
                .value
                .split(':')
                .map(|p| multifrac::config::parse_value(p, e.line, "grid"))
                .collect::<Result<_>>()?;
            let [start, stop, step] = parts[..] else {
                return Err(Error::config(e.line, "grid must be start:stop:step"));
            };
            if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
                return Err(Error::config(e.line, "grid needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        (Some(_), Some(e)) => return Err(Error::config(e.line, "give either `alphas` or `grid`, not both")),
        (None, None) => return Err(f.error("missing `alphas` or `grid`")),
    };
    if alphas.is_empty() || alphas.iter().any(|a| !a.is_finite()) {
        return Err(f.error("alpha grid must be non-empty and finite"));
    }
    Ok(alphas)
}

/// `delta_c`, `delta_min`, `delta_clip`.
pub fn read_schedule(f: &mut Fields<'_>) -> Result<DeltaSchedule> {
    let d = DeltaSchedule::default();
    let s = DeltaSchedule {
        c: f.get_or("delta_c", d.c)?,
        min: f.get_or("delta_min", d.min)?,
        clip: f.get_or("delta_clip", d.clip)?,
    };
    s.validate().map_err(|e| f.error(e.to_string()))?;
    Ok(s)
}

/// `n_min`, `n_max`; the `--nmax` flag overrides `n_max`.
pub fn read_n_range(f: &mut Fields<'_>, settings: &Settings, default_max: usize, limit: usize) -> Result<NRange> {
    let n_min: usize = f.get_or("n_min", 8)?;
    let n_max: usize = f.get_or("n_max", default_max)?;
    let n_max = settings.nmax.unwrap_or(n_max);
    NRange::with_limit(n_min, n_max, limit).map_err(|e| f.error(e.to_string()))
}

/// `indicator lo hi`, `constant c` or `identity`.
pub fn read_observable(f: &mut Fields<'_>, key: &str) -> Result<Observable> {
    let Some(e) = f.entry(key)? else {
        return Err(f.error(format!("missing key {key:?}")));
    };
    let words: Vec<&str> = e.value.split_whitespace().collect();
    let num = |s: &str| multifrac::config::parse_value::<f64>(s, e.line, key);
    let obs = match words[..] {
        ["indicator", lo, hi] => Observable::Indicator {
            lo: num(lo)?,
            hi: num(hi)?,
        },
        ["constant", c] => Observable::Constant { value: num(c)? },
        ["identity"] => Observable::Identity,
        _ => {
            return Err(Error::config(
                e.line,
                format!(
                    "observable {:?} is not `indicator lo hi`, `constant c` or `identity`",
                    e.value
                ),
            ))
        }
    };
    Ok(obs)
}

/// Largest absolute difference over rows where both values exist.
pub fn max_gap(a: &[Option<f64>], b: &[Option<f64>]) -> Option<f64> {
    a.iter()
        .zip(b)
        .filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).abs()))
        .reduce(f64::max)
}
