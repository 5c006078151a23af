//! Partition sums by exact enumeration.
//!
//! Every admissible `n`-word is visited once. The enumeration is split into
//! disjoint prefix blocks that run in parallel; each block is summed in a
//! fixed order and the blocks are merged in lexicographic order, so results
//! do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fit_line, upper_two_thirds, LogSumExp};
use crate::symbolic::{Potential, ShiftSpace};
use crate::thermo::rotation_interval;

/// Largest word length enumerated unless a caller raises the limit.
pub const DEFAULT_MAX_N: usize = 26;

// aim for at least this many prefix blocks so threads stay busy
const MIN_BLOCKS: u128 = 64;

/// Inclusive range of word lengths used in a slope fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NRange {
    pub min: usize,
    pub max: usize,
}

impl NRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        NRange::with_limit(min, max, DEFAULT_MAX_N)
    }

    pub fn with_limit(min: usize, max: usize, limit: usize) -> Result<Self> {
        if min == 0 {
            return Err(Error::InvalidArgument("n must start at 1 or more".into()));
        }
        if max < min || max - min + 1 < 3 {
            return Err(Error::TooFewPoints((max + 1).saturating_sub(min)));
        }
        if max > limit {
            return Err(Error::InvalidArgument(format!(
                "n = {max} is over the enumeration limit {limit}"
            )));
        }
        Ok(NRange { min, max })
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.min..=self.max
    }

    pub fn len(&self) -> usize {
        self.max - self.min + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Log partition sum at one word length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSum {
    pub n: usize,
    /// `log Σ exp(S_n ψ)`, absent when no word qualified.
    pub log_sum: Option<f64>,
    pub words: u64,
}

/// Slope of `log Z_n` against `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureEstimate {
    pub value: f64,
    pub intercept: f64,
    pub n_range: NRange,
    /// Word lengths that entered the fit.
    pub fitted_n: Vec<usize>,
    pub sums: Vec<LevelSum>,
    /// Root mean square residual of the fit.
    pub residual: f64,
    /// Word lengths with no qualifying word.
    pub skipped: Vec<usize>,
}

impl PressureEstimate {
    pub(crate) fn fit(n_range: NRange, sums: Vec<LevelSum>) -> Result<Self> {
        let points: Vec<(f64, f64)> = sums.iter().filter_map(|s| s.log_sum.map(|v| (s.n as f64, v))).collect();
        let skipped: Vec<usize> = sums.iter().filter(|s| s.log_sum.is_none()).map(|s| s.n).collect();
        if points.is_empty() {
            return Err(Error::LevelNotWitnessed);
        }
        if points.len() < 3 {
            return Err(Error::TooFewPoints(points.len()));
        }
        let used = upper_two_thirds(&points);
        let (value, intercept, residual) = fit_line(used)?;
        Ok(PressureEstimate {
            value,
            intercept,
            n_range,
            fitted_n: used.iter().map(|p| p.0 as usize).collect(),
            sums,
            residual,
            skipped,
        })
    }
}

/// Visits every admissible `n`-word with the Birkhoff sums of `pots` and
/// folds the results. `visit` receives the word and one sum per potential.
pub(crate) fn fold_words<A, I, V, M>(
    space: &ShiftSpace,
    n: usize,
    pots: &[&Potential],
    init: I,
    visit: V,
    merge: M,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[u8], &[f64]) + Sync,
    M: Fn(&mut A, A),
{
    let mut depth = 1;
    while depth < n && space.count_words(depth) < MIN_BLOCKS {
        depth += 1;
    }
    let blocks = space.prefix_blocks(depth, n);
    let parts: Vec<A> = blocks
        .par_iter()
        .map(|prefix| {
            let mut acc = init();
            let mut walker = Walker::new(space, n, pots);
            for &s in prefix {
                walker.push(s);
            }
            walker.run(&mut acc, &visit);
            acc
        })
        .collect();
    let mut total = init();
    for part in parts {
        merge(&mut total, part);
    }
    total
}

struct Walker<'a> {
    space: &'a ShiftSpace,
    n: usize,
    pots: &'a [&'a Potential],
    path: Vec<u8>,
    // partial[d * pots.len() + p]: sum of pots[p] over windows inside path[..d]
    partial: Vec<f64>,
    totals: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(space: &'a ShiftSpace, n: usize, pots: &'a [&'a Potential]) -> Self {
        Walker {
            space,
            n,
            pots,
            path: Vec::with_capacity(n),
            partial: vec![0.0; (n + 1) * pots.len()],
            totals: vec![0.0; pots.len()],
        }
    }

    fn push(&mut self, s: u8) {
        let d = self.path.len();
        self.path.push(s);
        let np = self.pots.len();
        for (p, pot) in self.pots.iter().enumerate() {
            let m = pot.memory();
            let mut v = self.partial[d * np + p];
            if d + 1 >= m {
                v += pot.value(&self.path[d + 1 - m..]);
            }
            self.partial[(d + 1) * np + p] = v;
        }
    }

    fn run<A>(&mut self, acc: &mut A, visit: &impl Fn(&mut A, &[u8], &[f64])) {
        let d = self.path.len();
        if d == self.n {
            let np = self.pots.len();
            for (p, pot) in self.pots.iter().enumerate() {
                self.totals[p] = self.partial[d * np + p] + pot.closing_sum(&self.path);
            }
            visit(acc, &self.path, &self.totals);
            return;
        }
        let space = self.space;
        let succ: &[u8] = if d == 0 {
            &ALL_SYMBOLS[..space.alphabet_size()]
        } else {
            space.successors(self.path[d - 1])
        };
        for &s in succ {
            self.push(s);
            self.run(acc, visit);
            self.path.pop();
        }
    }
}

const ALL_SYMBOLS: [u8; 36] = {
    let mut a = [0u8; 36];
    let mut i = 0;
    while i < 36 {
        a[i] = i as u8;
        i += 1;
    }
    a
};

fn check_potential(space: &ShiftSpace, pot: &Potential, n: usize) -> Result<()> {
    if pot.space() != space {
        return Err(Error::InvalidPotential("potential lives on a different shift".into()));
    }
    if pot.memory() > n {
        return Err(Error::WordTooShort {
            len: n,
            memory: pot.memory(),
        });
    }
    Ok(())
}

/// `log Σ_{|w|=n} exp(S_n pot(w))` for each `n`, then the slope in `n`.
pub fn counting_pressure(space: &ShiftSpace, pot: &Potential, n_range: NRange) -> Result<PressureEstimate> {
    check_potential(space, pot, n_range.min)?;
    let sums = n_range
        .iter()
        .map(|n| {
            let (lse, words) = fold_words(
                space,
                n,
                &[pot],
                || (LogSumExp::new(), 0u64),
                |acc, _, s| {
                    acc.0.add(s[0]);
                    acc.1 += 1;
                },
                |acc, part| {
                    acc.0.merge(&part.0);
                    acc.1 += part.1;
                },
            );
            LevelSum {
                n,
                log_sum: (!lse.is_empty()).then(|| lse.value()),
                words,
            }
        })
        .collect();
    PressureEstimate::fit(n_range, sums)
}

/// Tolerance schedule `δ_n` for restricted partition sums:
/// `max(min, c/√n)`, optionally capped by the distance from `α` to the
/// nearest end of the rotation interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaSchedule {
    pub c: f64,
    pub min: f64,
    /// Cap `δ_n` by the distance from `α` to the closest endpoint of the
    /// rotation interval (zero outside it).
    pub clip: bool,
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        DeltaSchedule {
            c: 0.5,
            min: 0.01,
            clip: true,
        }
    }
}

// rounding allowance when comparing an average with α ± δ
const AVERAGE_SLACK: f64 = 1e-12;

impl DeltaSchedule {
    pub fn sqrt(c: f64, min: f64) -> Result<Self> {
        let s = DeltaSchedule { c, min, clip: false };
        s.validate()?;
        Ok(s)
    }

    pub fn fixed(delta: f64) -> Result<Self> {
        DeltaSchedule::sqrt(0.0, delta)
    }

    pub fn clipped(mut self, clip: bool) -> Self {
        self.clip = clip;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0 && self.c.is_finite() && self.min > 0.0 && self.min.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "delta schedule needs c >= 0 and min > 0, got c = {}, min = {}",
                self.c, self.min
            )));
        }
        Ok(())
    }

    /// `δ_n` before clipping.
    pub fn raw(&self, n: usize) -> f64 {
        self.min.max(self.c / (n as f64).sqrt())
    }

    /// `δ_n` for a target `α` given the rotation interval `[lo, hi]`.
    pub fn delta(&self, n: usize, alpha: f64, interval: (f64, f64)) -> f64 {
        let d = self.raw(n);
        if !self.clip {
            return d;
        }
        let (lo, hi) = interval;
        if alpha < lo - AVERAGE_SLACK || alpha > hi + AVERAGE_SLACK {
            return 0.0;
        }
        d.min((alpha - lo).max(0.0)).min((hi - alpha).max(0.0))
    }
}

/// Restricted partition sums `Σ exp(S_n ψ)` over `n`-words whose
/// `φ`-average lies within `δ_n` of `α`, for several targets in one pass.
///
/// Entries are `Err(LevelNotWitnessed)` for targets that no word reaches.
pub fn direct_level_pressures(
    space: &ShiftSpace,
    phi: &Potential,
    psi: &Potential,
    alphas: &[f64],
    schedule: &DeltaSchedule,
    n_range: NRange,
) -> Result<Vec<Result<PressureEstimate>>> {
    schedule.validate()?;
    check_potential(space, phi, n_range.min)?;
    check_potential(space, psi, n_range.min)?;
    let interval = if schedule.clip {
        let r = rotation_interval(space, phi)?;
        (r.min, r.max)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    let a = alphas.len();
    let mut per_alpha: Vec<Vec<LevelSum>> = vec![Vec::with_capacity(n_range.len()); a];
    for n in n_range.iter() {
        let deltas: Vec<f64> = alphas.iter().map(|&al| schedule.delta(n, al, interval)).collect();
        let inv_n = 1.0 / n as f64;
        let (lses, counts) = fold_words(
            space,
            n,
            &[phi, psi],
            || (vec![LogSumExp::new(); a], vec![0u64; a]),
            |acc, _, s| {
                let avg = s[0] * inv_n;
                for i in 0..a {
                    if (avg - alphas[i]).abs() <= deltas[i] + AVERAGE_SLACK {
                        acc.0[i].add(s[1]);
                        acc.1[i] += 1;
                    }
                }
            },
            |acc, part| {
                for i in 0..a {
                    acc.0[i].merge(&part.0[i]);
                    acc.1[i] += part.1[i];
                }
            },
        );
        for i in 0..a {
            per_alpha[i].push(LevelSum {
                n,
                log_sum: (!lses[i].is_empty()).then(|| lses[i].value()),
                words: counts[i],
            });
        }
    }
    Ok(per_alpha
        .into_iter()
        .map(|sums| PressureEstimate::fit(n_range, sums))
        .collect())
}

/// Restricted-counting estimate of the level-set pressure at one `α`.
pub fn direct_level_pressure(
    space: &ShiftSpace,
    phi: &Potential,
    psi: &Potential,
    alpha: f64,
    schedule: &DeltaSchedule,
    n_range: NRange,
) -> Result<PressureEstimate> {
    direct_level_pressures(space, phi, psi, &[alpha], schedule, n_range)?
        .pop()
        .expect("one target in, one result out")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_range_validation() {
        assert!(NRange::new(8, 20).is_ok());
        assert_eq!(NRange::new(8, 9), Err(Error::TooFewPoints(2)));
        assert!(NRange::new(8, 27).is_err());
        assert!(NRange::with_limit(8, 27, 30).is_ok());
        assert!(NRange::new(0, 5).is_err());
    }

    #[test]
    fn fold_visits_every_word_once_in_order() {
        let gm = ShiftSpace::golden_mean();
        let zero = Potential::constant(&gm, 0.0);
        let words = fold_words(
            &gm,
            11,
            &[&zero],
            Vec::new,
            |acc: &mut Vec<Vec<u8>>, w, _| acc.push(w.to_vec()),
            |acc, part| acc.extend(part),
        );
        let expected: Vec<Vec<u8>> = gm.words(11).map(|w| w.into_symbols()).collect();
        assert_eq!(words, expected);
    }

    #[test]
    fn fold_sums_match_birkhoff_sums() {
        let gm = ShiftSpace::golden_mean();
        let pot = Potential::from_fn(&gm, 2, |w| (w[0] as f64) * 0.7 - (w[1] as f64) * 0.3 + 0.1).unwrap();
        let sums = fold_words(
            &gm,
            9,
            &[&pot],
            Vec::new,
            |acc: &mut Vec<f64>, _, s| acc.push(s[0]),
            |acc, part| acc.extend(part),
        );
        for (w, s) in gm.words(9).zip(sums) {
            assert!((pot.birkhoff_sum(&w).unwrap() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn counting_examples() {
        let full = ShiftSpace::full(2).unwrap();
        let est = counting_pressure(&full, &Potential::constant(&full, 0.0), NRange::new(8, 20).unwrap()).unwrap();
        assert!((est.value - 2f64.ln()).abs() < 1e-9);
        let ind = Potential::indicator(&full, 1);
        let est = counting_pressure(&full, &ind, NRange::new(8, 20).unwrap()).unwrap();
        assert!((est.value - (1.0 + 1f64.exp()).ln()).abs() < 1e-6);
        let gm = ShiftSpace::golden_mean();
        let est = counting_pressure(&gm, &Potential::constant(&gm, 0.0), NRange::new(8, 24).unwrap()).unwrap();
        assert!((est.value - 0.481212).abs() < 1e-3);
    }

    #[test]
    fn schedule_clipping() {
        let s = DeltaSchedule::default();
        assert!((s.raw(16) - 0.125).abs() < 1e-15);
        assert_eq!(s.delta(16, 1.0, (0.0, 1.0)), 0.0);
        assert_eq!(s.delta(16, 0.7, (0.0, 0.5)), 0.0);
        assert!((s.delta(16, 0.45, (0.0, 0.5)) - 0.05).abs() < 1e-15);
        assert_eq!(s.clipped(false).delta(16, 1.0, (0.0, 1.0)), 0.125);
        assert!(DeltaSchedule::fixed(0.0).is_err());
    }

    #[test]
    fn direct_level_examples() {
        let full = ShiftSpace::full(2).unwrap();
        let phi = Potential::indicator(&full, 1);
        let zero = Potential::constant(&full, 0.0);
        let r = NRange::new(8, 24).unwrap();
        let s = DeltaSchedule::default();
        let half = direct_level_pressure(&full, &phi, &zero, 0.5, &s, r).unwrap();
        assert!((half.value - 2f64.ln()).abs() < 0.02, "{}", half.value);
        let one = direct_level_pressure(&full, &phi, &zero, 1.0, &s, r).unwrap();
        assert!(one.value.abs() < 1e-9);
        let tilted = direct_level_pressure(&full, &phi, &phi, 0.5, &s, r).unwrap();
        assert!((tilted.value - (2f64.ln() + 0.5)).abs() < 0.03);
    }

    #[test]
    fn unwitnessed_level_is_an_error() {
        let gm = ShiftSpace::golden_mean();
        let phi = Potential::indicator(&gm, 1);
        let zero = Potential::constant(&gm, 0.0);
        let r = NRange::new(8, 16).unwrap();
        let e = direct_level_pressure(&gm, &phi, &zero, 0.7, &DeltaSchedule::default(), r);
        assert_eq!(e, Err(Error::LevelNotWitnessed));
    }
}
