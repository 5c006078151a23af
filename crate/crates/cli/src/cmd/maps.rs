//! Smooth maps: point evaluations, orbit ensembles, the coded MP spectrum
//! and the Viana invariance check.

use multifrac::config::{parse_value, ConfigFile, Entry};
use multifrac::smooth::{
    empirical_spectrum, mp_level_spectrum, viana_invariance, EnsembleConfig, MPMap, SmoothMap, TorusExpandingMap,
    VianaMap, CODING_METHOD, DEFAULT_TRANSIENT, DEFAULT_VIANA_A, DEFAULT_VIANA_ALPHA, MAX_CODING_DEPTH, MIN_ENSEMBLE,
};
use multifrac::{Error, Result};
use serde_json::{json, Map, Value};

use super::{read_alphas, read_n_range, read_observable, read_schedule, Finished};
use crate::format::{csv, field, g12, text};
use crate::run::{CliError, Output, Settings};

struct Maps {
    mp: Option<MPMap>,
    torus: Option<TorusExpandingMap>,
    viana: Option<VianaMap>,
}

fn read_maps(cfg: &ConfigFile) -> Result<Maps> {
    let mp = match cfg.optional_fields("mp") {
        None => None,
        Some(mut f) => {
            let alpha: f64 = f.require("alpha")?;
            let map = MPMap::new(alpha).map_err(|e| f.error(e.to_string()))?;
            f.finish()?;
            Some(map)
        }
    };
    let torus = match cfg.optional_fields("torus") {
        None => None,
        Some(mut f) => {
            let multipliers: Vec<u32> = f.require_list("multipliers")?;
            let map = TorusExpandingMap::new(multipliers).map_err(|e| f.error(e.to_string()))?;
            f.finish()?;
            Some(map)
        }
    };
    let viana = match cfg.optional_fields("viana") {
        None => None,
        Some(mut f) => {
            let d: u32 = f.get_or("d", 16)?;
            let a: f64 = f.get_or("a", DEFAULT_VIANA_A)?;
            let alpha: f64 = f.get_or("alpha", DEFAULT_VIANA_ALPHA)?;
            let map = VianaMap::new(d, a, alpha).map_err(|e| f.error(e.to_string()))?;
            f.finish()?;
            Some(map)
        }
    };
    Ok(Maps { mp, torus, viana })
}

fn missing_map(e: &Entry, name: &str) -> Error {
    Error::config(e.line, format!("`{}` needs a [{name}] section", e.key))
}

/// Points written `c0:c1:…`, separated by commas.
fn points(e: &Entry, dim: usize) -> Result<Vec<Vec<f64>>> {
    e.value
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let coords: Vec<f64> = p
                .split(':')
                .map(|c| parse_value(c, e.line, &e.key))
                .collect::<Result<_>>()?;
            if coords.len() != dim {
                return Err(Error::config(
                    e.line,
                    format!("point {:?} has {} coordinates, expected {dim}", p.trim(), coords.len()),
                ));
            }
            Ok(coords)
        })
        .collect()
}

fn samples(cfg: &ConfigFile, maps: &Maps, out: &mut Output) -> std::result::Result<Option<Value>, CliError> {
    let Some(mut f) = cfg.optional_fields("samples") else {
        return Ok(None);
    };
    let mut written = Vec::new();
    if let Some(e) = f.entry("mp")? {
        let map = maps.mp.ok_or_else(|| missing_map(e, "mp"))?;
        let mut rows = Vec::new();
        for p in points(e, 1)? {
            let y = map
                .try_apply(p[0])
                .map_err(|err| Error::config(e.line, err.to_string()))?;
            rows.push(vec![g12(p[0]), g12(y)]);
        }
        out.write("mp_samples.csv", &csv(&["x", "y"], &rows))?;
        written.push("mp_samples.csv");
    }
    if let Some(e) = f.entry("torus")? {
        let map = maps.torus.as_ref().ok_or_else(|| missing_map(e, "torus"))?;
        let dim = map.dimension();
        let mut rows = Vec::new();
        for p in points(e, dim)? {
            let y = map.apply(&p).map_err(|err| Error::config(e.line, err.to_string()))?;
            rows.push(p.iter().chain(&y).copied().map(g12).collect());
        }
        let names: Vec<String> = (0..dim)
            .map(|i| format!("x{i}"))
            .chain((0..dim).map(|i| format!("y{i}")))
            .collect();
        let header: Vec<&str> = names.iter().map(String::as_str).collect();
        out.write("torus_samples.csv", &csv(&header, &rows))?;
        written.push("torus_samples.csv");
    }
    if let Some(e) = f.entry("viana")? {
        let map = maps.viana.ok_or_else(|| missing_map(e, "viana"))?;
        let mut rows = Vec::new();
        for p in points(e, 2)? {
            let (t, x) = map
                .apply(p[0], p[1])
                .map_err(|err| Error::config(e.line, err.to_string()))?;
            rows.push(vec![g12(p[0]), g12(p[1]), g12(t), g12(x)]);
        }
        out.write(
            "viana_samples.csv",
            &csv(&["theta", "x", "theta_next", "x_next"], &rows),
        )?;
        written.push("viana_samples.csv");
    }
    f.finish()?;
    Ok(Some(json!(written)))
}

fn ensemble(
    cfg: &ConfigFile,
    maps: &Maps,
    settings: &Settings,
    out: &mut Output,
) -> std::result::Result<Option<(Value, Value)>, CliError> {
    let Some(mut f) = cfg.optional_fields("ensemble") else {
        return Ok(None);
    };
    let e = f.entry("map")?.ok_or_else(|| f.error("missing key \"map\""))?;
    let map = match e.value.as_str() {
        "mp" => SmoothMap::Mp(maps.mp.ok_or_else(|| missing_map(e, "mp"))?),
        "torus" => SmoothMap::Torus(maps.torus.clone().ok_or_else(|| missing_map(e, "torus"))?),
        "viana" => SmoothMap::Viana(maps.viana.ok_or_else(|| missing_map(e, "viana"))?),
        other => return Err(Error::config(e.line, format!("map {other:?} is not mp, torus or viana")).into()),
    };
    let obs = read_observable(&mut f, "observable")?;
    let ens = EnsembleConfig {
        size: f.get_or("size", 10 * MIN_ENSEMBLE)?,
        n: f.get_or("n", 20)?,
        bins: f.get_or("bins", 21)?,
        seed: settings.seed,
        transient: f.get_or("transient", DEFAULT_TRANSIENT)?,
        coordinate: f.get_or("coordinate", 0)?,
    };
    f.finish()?;
    let spectrum = empirical_spectrum(&map, &obs, &ens).map_err(|err| match err {
        Error::InvalidArgument(m) => Error::config(cfg.section("ensemble").map_or(0, |s| s.line), m),
        other => other,
    })?;
    let rows: Vec<Vec<String>> = spectrum
        .bins
        .iter()
        .map(|b| {
            vec![
                g12(b.lo),
                g12(b.hi),
                b.count.to_string(),
                g12(b.fraction),
                field(b.raw_rate),
                field(b.rate),
            ]
        })
        .collect();
    out.write(
        "ensemble.csv",
        &csv(&["lo", "hi", "count", "fraction", "raw_rate", "rate"], &rows),
    )?;
    let resolved = json!({ "map": map, "observable": obs, "config": ens });
    Ok(Some((
        resolved,
        serde_json::to_value(&spectrum).expect("spectrum serializes"),
    )))
}

fn coding(
    cfg: &ConfigFile,
    maps: &Maps,
    settings: &Settings,
    out: &mut Output,
) -> std::result::Result<Option<(Value, Value)>, CliError> {
    let Some(mut f) = cfg.optional_fields("coding") else {
        return Ok(None);
    };
    let map = maps
        .mp
        .ok_or_else(|| f.error("the coded spectrum needs an [mp] section"))?;
    let obs = read_observable(&mut f, "observable")?;
    let alphas = read_alphas(&mut f)?;
    let n_range = read_n_range(&mut f, settings, 16, MAX_CODING_DEPTH)?;
    let schedule = read_schedule(&mut f)?;
    f.finish()?;
    let curve = mp_level_spectrum(&map, &obs, &alphas, &schedule, n_range)?;
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| {
            vec![
                g12(p.alpha),
                field(p.value),
                p.feasible.to_string(),
                p.endpoint.to_string(),
                text(CODING_METHOD),
            ]
        })
        .collect();
    out.write(
        "coding.csv",
        &csv(&["alpha", "F", "feasible", "endpoint", "method"], &rows),
    )?;
    let resolved = json!({
        "observable": obs,
        "alphas": alphas,
        "n_min": n_range.min,
        "n_max": n_range.max,
        "delta_c": schedule.c,
        "delta_min": schedule.min,
        "delta_clip": schedule.clip,
    });
    let summary = json!({
        "method": curve.method,
        "pressure_bound": curve.pressure_bound,
        "points": curve.points.len(),
        "feasible": curve.points.iter().filter(|p| p.feasible).count(),
    });
    Ok(Some((resolved, summary)))
}

fn invariance(cfg: &ConfigFile, maps: &Maps, settings: &Settings) -> Result<Option<(Value, Value)>> {
    let Some(mut f) = cfg.optional_fields("invariance") else {
        return Ok(None);
    };
    let map = maps
        .viana
        .ok_or_else(|| f.error("the invariance check needs a [viana] section"))?;
    let samples: usize = f.get_or("samples", 1000)?;
    let steps: usize = f.get_or("steps", 200)?;
    f.finish()?;
    let report = viana_invariance(&map, samples, steps, settings.seed)?;
    Ok(Some((
        json!({ "samples": samples, "steps": steps }),
        serde_json::to_value(&report).expect("report serializes"),
    )))
}

pub fn run(cfg: &ConfigFile, settings: &Settings, out: &mut Output) -> std::result::Result<Finished, CliError> {
    cfg.check_sections(&["mp", "torus", "viana", "samples", "ensemble", "coding", "invariance"])?;
    let maps = read_maps(cfg)?;
    if !["samples", "ensemble", "coding", "invariance"]
        .iter()
        .any(|s| cfg.section(s).is_some())
    {
        return Err(Error::config(
            cfg.sections().last().map_or(1, |s| s.line),
            "nothing to do: give at least one of [samples], [ensemble], [coding] or [invariance]",
        )
        .into());
    }

    let mut resolved = Map::new();
    let mut summary = Map::new();
    resolved.insert("mp".into(), json!(maps.mp));
    resolved.insert("torus".into(), json!(maps.torus));
    resolved.insert("viana".into(), json!(maps.viana));
    if let Some(files) = samples(cfg, &maps, out)? {
        summary.insert("samples".into(), files);
    }
    for (name, part) in [
        ("ensemble", ensemble(cfg, &maps, settings, out)?),
        ("coding", coding(cfg, &maps, settings, out)?),
        ("invariance", invariance(cfg, &maps, settings)?),
    ] {
        if let Some((r, s)) = part {
            resolved.insert(name.into(), r);
            summary.insert(name.into(), s);
        }
    }
    out.json("maps.json", &summary)?;
    Ok(Finished {
        resolved: Value::Object(resolved),
        failures: Vec::new(),
    })
}
