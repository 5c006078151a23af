//! Specification-gap search with verified shadowing points.

use multifrac::config::{parse_list, ConfigFile, Entry, Fields};
use multifrac::smooth::{gap_sweep, spec_gap_estimate, CircleMap, FullBranchMap, MPMap, Segment};
use multifrac::{Error, Result};
use serde_json::{json, Map, Value};

use super::Finished;
use crate::run::{CliError, Output, Settings};

/// `start, len`.
fn segment(e: &Entry) -> Result<Segment> {
    let parts: Vec<f64> = parse_list(&e.value, e.line, &e.key)?;
    match parts[..] {
        [start, len] if len >= 1.0 && len.fract() == 0.0 => Ok(Segment {
            start,
            len: len as usize,
        }),
        _ => Err(Error::config(
            e.line,
            format!("{} = {:?} is not `start, length`", e.key, e.value),
        )),
    }
}

fn required_segment(f: &mut Fields<'_>, key: &str) -> Result<Segment> {
    let e = f.entry(key)?.ok_or_else(|| f.error(format!("missing key {key:?}")))?;
    segment(e)
}

fn read_map(cfg: &ConfigFile, f: &mut Fields<'_>) -> Result<(Box<dyn FullBranchMap>, Value)> {
    let kind: String = f.get_or("map", "doubling".to_string())?;
    let d: Option<u32> = f.get("d")?;
    if d.is_some() && kind != "circle" {
        return Err(f.error("`d` only applies to map = circle"));
    }
    if let (Some(s), false) = (cfg.section("mp"), kind == "mp") {
        return Err(Error::config(s.line, format!("[mp] is unused with map = {kind}")));
    }
    match kind.as_str() {
        "doubling" => Ok((Box::new(CircleMap::doubling()), json!({ "map": "circle", "d": 2 }))),
        "circle" => {
            let d = d.unwrap_or(2);
            let map = CircleMap::new(d).map_err(|e| f.error(e.to_string()))?;
            Ok((Box::new(map), json!({ "map": "circle", "d": d })))
        }
        "mp" => {
            let mut m = cfg
                .fields("mp")
                .map_err(|_| f.error("map = mp needs an [mp] section"))?;
            let alpha: f64 = m.require("alpha")?;
            let map = MPMap::new(alpha).map_err(|e| m.error(e.to_string()))?;
            m.finish()?;
            Ok((Box::new(map), json!({ "map": "mp", "alpha": alpha })))
        }
        other => Err(f.error(format!("map {other:?} is not doubling, circle or mp"))),
    }
}

pub fn run(cfg: &ConfigFile, _settings: &Settings, out: &mut Output) -> std::result::Result<Finished, CliError> {
    cfg.check_sections(&["spec_gap", "mp", "sweep"])?;
    let mut f = cfg.fields("spec_gap")?;
    let (map, map_json) = read_map(cfg, &mut f)?;
    let eps: f64 = f.require("eps")?;
    let p_max: usize = f.get_or("p_max", 64)?;
    let first = f.entry("first")?.map(segment).transpose()?;
    let second = f.entry("second")?.map(segment).transpose()?;
    let pair = match (first, second) {
        (Some(a), Some(b)) => Some([a, b]),
        (None, None) => None,
        _ => return Err(f.error("give both `first` and `second` segments, or neither").into()),
    };
    let line = f.line();
    f.finish()?;

    let sweep_cfg = match cfg.optional_fields("sweep") {
        None => None,
        Some(mut s) => {
            let start: f64 = s.get_or("first_start", 0.0)?;
            let lengths: Vec<usize> = s.require_list("lengths")?;
            let second = required_segment(&mut s, "second")?;
            s.finish()?;
            Some((start, lengths, second))
        }
    };
    if pair.is_none() && sweep_cfg.is_none() {
        return Err(Error::config(line, "[spec_gap] has no segments and there is no [sweep]").into());
    }

    let mut resolved = Map::new();
    let mut report = Map::new();
    let mut failures = Vec::new();
    resolved.insert("map".into(), map_json);
    resolved.insert("eps".into(), json!(eps));
    resolved.insert("p_max".into(), json!(p_max));
    if let Some(segments) = pair {
        let r = spec_gap_estimate(map.as_ref(), &segments, eps, p_max)?;
        if r.gap.is_none() {
            failures.push(
                r.failure
                    .clone()
                    .unwrap_or_else(|| format!("no verified witness up to p_max = {p_max}")),
            );
        }
        resolved.insert("segments".into(), json!(segments));
        report.insert("estimate".into(), serde_json::to_value(&r).expect("report serializes"));
    }
    if let Some((start, lengths, second)) = sweep_cfg {
        let s = gap_sweep(map.as_ref(), start, &lengths, second, eps, p_max)?;
        if !s.nonincreasing {
            failures.push("p(n)/n increases somewhere along the sweep, or a gap was not found".into());
        }
        resolved.insert(
            "sweep".into(),
            json!({ "first_start": start, "lengths": lengths, "second": second }),
        );
        report.insert("sweep".into(), serde_json::to_value(&s).expect("sweep serializes"));
    }
    out.json("spec_gap.json", &report)?;
    Ok(Finished {
        resolved: Value::Object(resolved),
        failures,
    })
}
