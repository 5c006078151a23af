use serde::Serialize;

use crate::error::{Error, Result};
use crate::moran::{glue_with_gap, MoranConfig};
use crate::numerics::log_sum_exp;
use crate::symbolic::{Potential, ShiftSpace, Word};
use crate::thermo::fold_words;

// families larger than this are refused
const MAX_FAMILY: usize = 2_000_000;

/// The words used at one level of a Moran construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparatedFamily {
    pub level: usize,
    pub word_length: usize,
    pub delta: f64,
    #[serde(skip)]
    pub words: Vec<Word>,
    /// `S_n ψ` for each word.
    #[serde(skip)]
    pub psi_sums: Vec<f64>,
    /// `φ`-average of each word.
    #[serde(skip)]
    pub phi_averages: Vec<f64>,
    pub size: usize,
    /// `log M_k = log Σ exp(S_n ψ)`.
    pub log_m: f64,
    /// `(1/n_k) log M_k`.
    pub per_symbol: f64,
    /// Largest `|average − α|` among the words.
    pub max_deviation: f64,
    /// Per component: word length and `log M_{k,i}`.
    pub component_lengths: Vec<usize>,
    pub component_log_m: Vec<f64>,
}

/// Words of length `n` whose `φ`-average is strictly within `delta` of `alpha`.
fn level_words(space: &ShiftSpace, phi: &Potential, n: usize, alpha: f64, delta: f64) -> Vec<Word> {
    let inv = 1.0 / n as f64;
    fold_words(
        space,
        n,
        &[phi],
        Vec::new,
        |acc: &mut Vec<Word>, w, s| {
            if (s[0] * inv - alpha).abs() < delta {
                acc.push(Word::from_symbols(w.to_vec()));
            }
        },
        |acc, part| acc.extend(part),
    )
}

/// Builds `S_k`: for one component, all admissible `n_k`-words whose
/// `φ`-average is within `δ_k` of `α` (strictly). With several components
/// each word glues one piece per component, the `i`-th of length
/// `⌊λ_i n_k⌋`.
pub fn build_family(
    space: &ShiftSpace,
    phi: &Potential,
    psi: &Potential,
    level: usize,
    config: &MoranConfig,
) -> Result<SeparatedFamily> {
    config.validate()?;
    if level == 0 || level > config.k_max() {
        return Err(Error::InvalidArgument(format!(
            "level {level} is outside 1..={}",
            config.k_max()
        )));
    }
    let n_hat = config.word_lengths[level - 1];
    let delta = config.deltas[level - 1];
    let components = config.effective_components();
    let gap = if components.len() > 1 { space.mixing_gap()? } else { 0 };

    let mut pieces = Vec::with_capacity(components.len());
    let mut lengths = Vec::with_capacity(components.len());
    let mut component_log_m = Vec::with_capacity(components.len());
    for c in &components {
        let len = ((c.weight * n_hat as f64).floor() as usize).max(1);
        if phi.memory() > len || psi.memory() > len {
            return Err(Error::WordTooShort {
                len,
                memory: phi.memory().max(psi.memory()),
            });
        }
        let words = level_words(space, phi, len, c.alpha, delta);
        if words.is_empty() {
            return Err(Error::EmptyFamily {
                level,
                delta,
                length: len,
            });
        }
        let sums: Vec<f64> = words.iter().map(|w| psi.birkhoff_sum(w)).collect::<Result<_>>()?;
        component_log_m.push(log_sum_exp(&sums));
        lengths.push(len);
        pieces.push(words);
    }

    let total: f64 = pieces.iter().map(|p| p.len() as f64).product();
    if total > MAX_FAMILY as f64 {
        return Err(Error::InvalidArgument(format!(
            "family of {total:.3e} words is too large"
        )));
    }
    let words: Vec<Word> = if pieces.len() == 1 {
        pieces.pop().expect("one component")
    } else {
        let mut out = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; pieces.len()];
        loop {
            let segs: Vec<Word> = idx.iter().zip(&pieces).map(|(&i, p)| p[i].clone()).collect();
            out.push(glue_with_gap(space, &segs, gap)?);
            let mut j = pieces.len();
            let done = loop {
                if j == 0 {
                    break true;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < pieces[j].len() {
                    break false;
                }
                idx[j] = 0;
            };
            if done {
                break;
            }
        }
        out
    };

    let n = words[0].len();
    let psi_sums: Vec<f64> = words.iter().map(|w| psi.birkhoff_sum(w)).collect::<Result<_>>()?;
    let phi_averages: Vec<f64> = words.iter().map(|w| phi.birkhoff_average(w)).collect::<Result<_>>()?;
    let log_m = log_sum_exp(&psi_sums);
    let max_deviation = phi_averages
        .iter()
        .map(|a| (a - config.alpha).abs())
        .fold(0.0, f64::max);
    Ok(SeparatedFamily {
        level,
        word_length: n,
        delta,
        size: words.len(),
        words,
        psi_sums,
        phi_averages,
        log_m,
        per_symbol: log_m / n as f64,
        max_deviation,
        component_lengths: lengths,
        component_log_m,
    })
}
