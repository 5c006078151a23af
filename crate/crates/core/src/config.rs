//! Sectioned plain-text configuration.
//!
//! ```text
//! # comments run to the end of the line
//! [shift]
//! row = 11
//! row = 10
//!
//! [phi]
//! memory = 1
//! 0 = 0.0
//! 1 = 1.0
//! ```
//!
//! A file is a list of `[section]` headers, each followed by `key = value`
//! lines. Keys are unique within a section unless a reader asks for all of
//! them (as `row` above). Readers reject keys they did not consume, and every
//! error names the line it comes from.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::moran::{Component, MoranConfig, DEFAULT_LEAF_BUDGET};
use crate::symbolic::{Potential, ShiftSpace, Word};

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigFile {
    sections: Vec<Section>,
    lines: usize,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        let mut lines = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            lines = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
                    .ok_or_else(|| Error::config(line, format!("malformed section header {content:?}")))?;
                if let Some(prev) = sections.iter().find(|s| s.name == name) {
                    return Err(Error::config(
                        line,
                        format!("section [{name}] already opened on line {}", prev.line),
                    ));
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(line, format!("expected `key = value`, got {content:?}")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::config(line, "empty key"));
            }
            let section = sections
                .last_mut()
                .ok_or_else(|| Error::config(line, "key outside of any section"))?;
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(ConfigFile { sections, lines })
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// The section, or an error pointing at the end of the file.
    pub fn require(&self, name: &str) -> Result<&Section> {
        self.section(name)
            .ok_or_else(|| Error::config(self.lines, format!("missing section [{name}] (end of input)")))
    }

    /// Fails on the first section whose name is not listed.
    pub fn check_sections(&self, allowed: &[&str]) -> Result<()> {
        match self.sections.iter().find(|s| !allowed.contains(&s.name.as_str())) {
            Some(s) => Err(Error::config(
                s.line,
                format!("unknown section [{}]; expected one of {}", s.name, allowed.join(", ")),
            )),
            None => Ok(()),
        }
    }

    pub fn fields(&self, name: &str) -> Result<Fields<'_>> {
        Ok(Fields::new(self.require(name)?))
    }

    pub fn optional_fields(&self, name: &str) -> Option<Fields<'_>> {
        self.section(name).map(Fields::new)
    }
}

/// Parses `text` as a `T`, reporting failures against `line`.
pub fn parse_value<T: FromStr>(text: &str, line: usize, key: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::config(line, format!("cannot parse {key} = {text:?}")))
}

/// Comma-separated list.
pub fn parse_list<T: FromStr>(text: &str, line: usize, key: &str) -> Result<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(s, line, key))
        .collect()
}

/// Strict reader over one section: tracks which entries were consumed.
pub struct Fields<'a> {
    section: &'a Section,
    used: Vec<bool>,
}

impl<'a> Fields<'a> {
    pub fn new(section: &'a Section) -> Self {
        Fields {
            section,
            used: vec![false; section.entries.len()],
        }
    }

    pub fn name(&self) -> &str {
        &self.section.name
    }

    /// Line of the section header.
    pub fn line(&self) -> usize {
        self.section.line
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::config(
            self.section.line,
            format!("[{}]: {}", self.section.name, message.into()),
        )
    }

    /// The single entry for `key`, if present.
    pub fn entry(&mut self, key: &str) -> Result<Option<&'a Entry>> {
        let mut found: Option<(usize, &'a Entry)> = None;
        for (i, e) in self.section.entries.iter().enumerate() {
            if e.key == key {
                if let Some((_, first)) = found {
                    return Err(Error::config(
                        e.line,
                        format!("duplicate key {key:?} (first set on line {})", first.line),
                    ));
                }
                found = Some((i, e));
            }
        }
        Ok(found.map(|(i, e)| {
            self.used[i] = true;
            e
        }))
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.entry(key)? {
            Some(e) => parse_value(&e.value, e.line, key).map(Some),
            None => Ok(None),
        }
    }

    pub fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| self.error(format!("missing key {key:?}")))
    }

    pub fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entry(key)? {
            Some(e) => parse_list(&e.value, e.line, key).map(Some),
            None => Ok(None),
        }
    }

    pub fn require_list<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        self.list(key)?
            .ok_or_else(|| self.error(format!("missing key {key:?}")))
    }

    /// Every entry for a repeatable key, in file order.
    pub fn all(&mut self, key: &str) -> Vec<&'a Entry> {
        let mut out = Vec::new();
        for (i, e) in self.section.entries.iter().enumerate() {
            if e.key == key {
                self.used[i] = true;
                out.push(e);
            }
        }
        out
    }

    /// Entries not consumed so far; they count as consumed afterwards.
    pub fn take_rest(&mut self) -> Vec<&'a Entry> {
        let mut out = Vec::new();
        for (i, e) in self.section.entries.iter().enumerate() {
            if !self.used[i] {
                self.used[i] = true;
                out.push(e);
            }
        }
        out
    }

    /// Fails on the first entry nobody asked for.
    pub fn finish(self) -> Result<()> {
        match self.used.iter().position(|&u| !u) {
            Some(i) => {
                let e = &self.section.entries[i];
                Err(Error::config(
                    e.line,
                    format!("unknown key {:?} in [{}]", e.key, self.section.name),
                ))
            }
            None => Ok(()),
        }
    }
}

/// Reads `[shift]`: either `preset = full` with `alphabet = k`,
/// `preset = golden_mean`, or one `row = 0101…` line per symbol.
pub fn read_shift(cfg: &ConfigFile) -> Result<ShiftSpace> {
    let mut f = cfg.fields("shift")?;
    let preset: Option<String> = f.get("preset")?;
    let alphabet: Option<usize> = f.get("alphabet")?;
    let rows = f.all("row");
    let line = f.line();
    let space = match preset.as_deref() {
        Some("full") => {
            if !rows.is_empty() {
                return Err(Error::config(rows[0].line, "rows given together with a preset"));
            }
            let k = alphabet.ok_or_else(|| f.error("preset full needs `alphabet`"))?;
            ShiftSpace::full(k).map_err(|e| Error::config(line, e.to_string()))?
        }
        Some("golden_mean") => {
            if !rows.is_empty() {
                return Err(Error::config(rows[0].line, "rows given together with a preset"));
            }
            ShiftSpace::golden_mean()
        }
        Some(other) => return Err(f.error(format!("unknown preset {other:?}; expected full or golden_mean"))),
        None => {
            if rows.is_empty() {
                return Err(f.error("need `preset` or transition `row` lines"));
            }
            let k = rows.len();
            if let Some(a) = alphabet {
                if a != k {
                    return Err(f.error(format!("alphabet = {a} but {k} rows given")));
                }
            }
            for r in &rows {
                if r.value.len() != k || !r.value.chars().all(|c| c == '0' || c == '1') {
                    return Err(Error::config(
                        r.line,
                        format!("transition row {:?} must be {k} characters of 0 and 1", r.value),
                    ));
                }
            }
            let strings: Vec<&str> = rows.iter().map(|r| r.value.as_str()).collect();
            ShiftSpace::from_row_strings(&strings).map_err(|e| Error::config(rows[0].line, e.to_string()))?
        }
    };
    f.finish()?;
    Ok(space)
}

/// Reads a potential section: `constant = c`, `indicator = s`, or
/// `memory = m` followed by one `word = value` line per admissible word.
pub fn read_potential(cfg: &ConfigFile, name: &str, space: &ShiftSpace) -> Result<Potential> {
    let mut f = cfg.fields(name)?;
    let constant: Option<f64> = f.get("constant")?;
    let indicator: Option<String> = f.get("indicator")?;
    let memory: Option<usize> = f.get("memory")?;
    let line = f.line();
    let wrap = |e: Error| Error::config(line, format!("[{name}]: {e}"));
    let pot = match (constant, indicator, memory) {
        (Some(c), None, None) => {
            if !c.is_finite() {
                return Err(f.error("constant must be finite"));
            }
            Potential::constant(space, c)
        }
        (None, Some(s), None) => {
            let w = space.parse_word(&s).map_err(wrap)?;
            if w.len() != 1 {
                return Err(f.error("indicator takes a single symbol"));
            }
            Potential::indicator(space, w.symbols()[0])
        }
        (None, None, Some(m)) => {
            let mut entries: Vec<(Word, f64)> = Vec::new();
            for e in f.take_rest() {
                let w = space
                    .parse_word(&e.key)
                    .map_err(|err| Error::config(e.line, format!("bad word {:?}: {err}", e.key)))?;
                let v: f64 = parse_value(&e.value, e.line, &e.key)?;
                entries.push((w, v));
            }
            Potential::from_table(space, m, &entries).map_err(wrap)?
        }
        _ => return Err(f.error("give exactly one of `constant`, `indicator` or `memory` with a word table")),
    };
    f.finish()?;
    Ok(pot)
}

impl MoranConfig {
    /// Reads the construction parameters from a section, leaving other keys
    /// for the caller. Keys: `alpha`, `gamma`, `eps`, `word_lengths`,
    /// `copies`, and optionally `deltas`, `min_lengths`, `leaf_budget` and
    /// `components` as `alpha:weight` pairs.
    pub fn read(f: &mut Fields<'_>) -> Result<MoranConfig> {
        let alpha: f64 = f.require("alpha")?;
        let gamma: f64 = f.require("gamma")?;
        let eps: f64 = f.require("eps")?;
        let word_lengths: Vec<usize> = f.require_list("word_lengths")?;
        let copies: Vec<usize> = f.require_list("copies")?;
        let k = word_lengths.len();
        let deltas = f
            .list("deltas")?
            .unwrap_or_else(|| (1..=k).map(|i| 1.0 / (i as f64 + 1.0)).collect());
        let min_lengths = f.list("min_lengths")?.unwrap_or_else(|| word_lengths.clone());
        let leaf_budget = f.get_or("leaf_budget", DEFAULT_LEAF_BUDGET)?;
        let components = match f.entry("components")? {
            None => Vec::new(),
            Some(e) => e
                .value
                .split(',')
                .map(|pair| {
                    let (a, w) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::config(e.line, format!("component {pair:?} is not alpha:weight")))?;
                    Ok(Component {
                        alpha: parse_value(a, e.line, "components")?,
                        weight: parse_value(w, e.line, "components")?,
                    })
                })
                .collect::<Result<_>>()?,
        };
        let cfg = MoranConfig {
            alpha,
            gamma,
            deltas,
            min_lengths,
            word_lengths,
            copies,
            eps,
            components,
            leaf_budget,
        };
        cfg.validate().map_err(|e| f.error(e.to_string()))?;
        Ok(cfg)
    }
}
