//! The weighted measures `μ_k` on level-`k` leaves.
//!
//! A leaf's weight is the product over its slots of `exp(S_n ψ)` of the word
//! in that slot, and the weights sum to `κ_k = Π M_i^{N_i}`. Because the
//! weights factor over slots, cylinder masses come from a left-to-right pass
//! over the slots whose only state is the last symbol written, which decides
//! the next bridge.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moran::{LeafIndex, MoranScheme};
use crate::numerics::log_sum_exp;
use crate::symbolic::Potential;

#[derive(Clone, Debug)]
pub struct MoranMeasure<'a> {
    scheme: &'a MoranScheme,
    level: usize,
    // log of the normalized weight exp(S ψ(w)) / M_i per family word
    log_weights: Vec<Vec<f64>>,
    log_m: Vec<f64>,
    log_kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureSummary {
    pub level: usize,
    pub log_kappa: f64,
    pub log_m: Vec<f64>,
}

/// `μ_k` for the scheme's families weighted by `ψ`.
pub fn moran_measure<'a>(scheme: &'a MoranScheme, psi: &Potential, level: usize) -> Result<MoranMeasure<'a>> {
    if level == 0 || level > scheme.k_max() {
        return Err(Error::InvalidArgument(format!(
            "level {level} is outside 1..={}",
            scheme.k_max()
        )));
    }
    let mut log_weights = Vec::with_capacity(level);
    let mut log_m = Vec::with_capacity(level);
    let mut log_kappa = 0.0;
    for lvl in 1..=level {
        let sums: Vec<f64> = scheme
            .family(lvl)
            .words
            .iter()
            .map(|w| psi.birkhoff_sum(w))
            .collect::<Result<_>>()?;
        let m = log_sum_exp(&sums);
        log_weights.push(sums.iter().map(|s| s - m).collect());
        log_m.push(m);
        log_kappa += scheme.copies(lvl) as f64 * m;
    }
    Ok(MoranMeasure {
        scheme,
        level,
        log_weights,
        log_m,
        log_kappa,
    })
}

impl<'a> MoranMeasure<'a> {
    pub fn scheme(&self) -> &'a MoranScheme {
        self.scheme
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `log κ_k = Σ N_i log M_i`.
    pub fn log_kappa(&self) -> f64 {
        self.log_kappa
    }

    pub fn summary(&self) -> MeasureSummary {
        MeasureSummary {
            level: self.level,
            log_kappa: self.log_kappa,
            log_m: self.log_m.clone(),
        }
    }

    /// `log 𝓛_k(z)` for the leaf with this index: the unnormalized weight.
    pub fn log_leaf_weight(&self, index: &LeafIndex) -> f64 {
        index
            .0
            .iter()
            .enumerate()
            .map(|(lvl, choices)| {
                choices
                    .iter()
                    .map(|&c| self.log_weights[lvl][c] + self.log_m[lvl])
                    .sum::<f64>()
            })
            .sum()
    }

    /// `log μ_k` of a single leaf.
    pub fn log_leaf_mass(&self, index: &LeafIndex) -> f64 {
        self.log_leaf_weight(index) - self.log_kappa
    }

    /// `μ_k([u])` for a word `u` no longer than `t_k`.
    pub fn cylinder_mass(&self, u: &[u8]) -> Result<f64> {
        let t = self.scheme.t(self.level);
        if u.len() > t {
            return Err(Error::InvalidArgument(format!(
                "cylinder depth {} exceeds the leaf length {t}",
                u.len()
            )));
        }
        let d = u.len();
        let k = self.scheme.space().alphabet_size();
        let gap = self.scheme.gap();
        // state[a]: mass of prefixes consistent with u whose last symbol is a
        let mut state: Option<Vec<f64>> = None;
        for slot in self.scheme.slots(self.level) {
            let bridge_start = if state.is_some() { slot.start - gap } else { slot.start };
            if bridge_start >= d {
                break;
            }
            let family = self.scheme.family(slot.level);
            let weights = &self.log_weights[slot.level - 1];
            let end = (slot.start + slot.len).min(d);
            let mut next = vec![0.0; k];
            for (w, &lw) in family.words.iter().zip(weights) {
                let s = w.symbols();
                if slot.start < end && s[..end - slot.start] != u[slot.start..end] {
                    continue;
                }
                let p = lw.exp();
                let last = s[s.len() - 1] as usize;
                match &state {
                    None => next[last] += p,
                    Some(prev) => {
                        for (a, &m) in prev.iter().enumerate() {
                            if m == 0.0 {
                                continue;
                            }
                            let b = self.scheme.bridge(a as u8, s[0]);
                            let shown = d.min(slot.start) - bridge_start;
                            if b[..shown] == u[bridge_start..bridge_start + shown] {
                                next[last] += m * p;
                            }
                        }
                    }
                }
            }
            state = Some(next);
        }
        Ok(state.map_or(1.0, |s| s.iter().sum()))
    }
}
