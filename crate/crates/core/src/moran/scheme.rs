//! The nested sets `C_k` and `L_k`.
//!
//! Every level-`k` leaf is addressed by an index word: for each level `i ≤ k`
//! the list of the `N_i` family words chosen for its slots. Leaves are
//! materialized only on request, except in eager mode where every `L_k` is
//! stored.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moran::{MoranConfig, SeparatedFamily};
use crate::symbolic::{ShiftSpace, Word};

/// Concatenates `segments`, inserting between neighbors the lexicographically
/// smallest admissible bridge of length `mixing_gap`.
pub fn glue(space: &ShiftSpace, segments: &[Word]) -> Result<Word> {
    glue_with_gap(space, segments, space.mixing_gap()?)
}

pub(crate) fn glue_with_gap(space: &ShiftSpace, segments: &[Word], gap: usize) -> Result<Word> {
    let mut out: Vec<u8> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        if seg.is_empty() || !space.is_admissible(seg.symbols()) {
            return Err(Error::InadmissibleWord(seg.to_string()));
        }
        if i > 0 {
            let a = *out.last().expect("previous segment is nonempty");
            let c = seg.symbols()[0];
            let bridge = space
                .smallest_bridge(a, c, gap)
                .expect("a bridge of the mixing gap length always exists");
            out.extend(bridge);
        }
        out.extend_from_slice(seg.symbols());
    }
    Ok(Word::from_symbols(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BuildMode {
    Eager,
    Lazy,
}

/// Position of one family word inside a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub level: usize,
    pub index: usize,
    pub start: usize,
    pub len: usize,
}

/// Per-level choice of family words: `choices[i][l]` indexes `S_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LeafIndex(pub Vec<Vec<usize>>);

impl LeafIndex {
    pub fn levels(&self) -> usize {
        self.0.len()
    }

    /// The index of the level-`k` ancestor.
    pub fn truncate(&self, k: usize) -> LeafIndex {
        LeafIndex(self.0[..k].to_vec())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: usize,
    pub n: usize,
    pub copies: usize,
    pub c: usize,
    pub t: usize,
    pub family_size: usize,
    /// `|L_k|` as a float; exact values overflow quickly.
    pub leaves: f64,
    pub log_m: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MoranScheme {
    #[serde(skip)]
    space: ShiftSpace,
    #[serde(skip)]
    families: Vec<SeparatedFamily>,
    copies: Vec<usize>,
    gap: usize,
    #[serde(skip)]
    bridges: Vec<Vec<Vec<u8>>>,
    levels: Vec<LevelStats>,
    mode: BuildMode,
    #[serde(skip)]
    eager: Option<Vec<Vec<Word>>>,
}

/// Assembles the construction from one family per level. Eager mode stores
/// every `L_k` and fails when `|L_{k_max}|` exceeds the leaf budget.
pub fn build_scheme(
    space: &ShiftSpace,
    families: Vec<SeparatedFamily>,
    config: &MoranConfig,
    mode: BuildMode,
) -> Result<MoranScheme> {
    config.validate()?;
    if families.len() != config.k_max() {
        return Err(Error::InvalidArgument(format!(
            "{} families given for {} levels",
            families.len(),
            config.k_max()
        )));
    }
    for (i, f) in families.iter().enumerate() {
        if f.words.is_empty() {
            return Err(Error::EmptyFamily {
                level: i + 1,
                delta: f.delta,
                length: f.word_length,
            });
        }
    }
    let gap = space.mixing_gap()?;
    let k = space.alphabet_size();
    let bridges: Vec<Vec<Vec<u8>>> = (0..k as u8)
        .map(|a| {
            (0..k as u8)
                .map(|c| {
                    space
                        .smallest_bridge(a, c, gap)
                        .expect("bridge of the mixing gap length")
                })
                .collect()
        })
        .collect();
    let mut levels = Vec::with_capacity(families.len());
    let mut t = 0;
    let mut leaves = 1.0f64;
    for (i, f) in families.iter().enumerate() {
        let copies = config.copies[i];
        let c = copies * f.word_length + (copies - 1) * gap;
        t = if i == 0 { c } else { t + gap + c };
        leaves *= (f.words.len() as f64).powi(copies as i32);
        levels.push(LevelStats {
            level: i + 1,
            n: f.word_length,
            copies,
            c,
            t,
            family_size: f.words.len(),
            leaves,
            log_m: f.log_m,
        });
    }
    let mut scheme = MoranScheme {
        space: space.clone(),
        families,
        copies: config.copies.clone(),
        gap,
        bridges,
        levels,
        mode,
        eager: None,
    };
    if mode == BuildMode::Eager {
        if leaves > config.leaf_budget as f64 {
            return Err(Error::BudgetExceeded {
                leaves,
                budget: config.leaf_budget,
            });
        }
        let mut all: Vec<Vec<Word>> = Vec::new();
        for lvl in 1..=scheme.k_max() {
            let words = scheme.all_indices(lvl).iter().map(|ix| scheme.leaf(ix)).collect();
            all.push(words);
        }
        scheme.eager = Some(all);
    }
    Ok(scheme)
}

impl MoranScheme {
    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn k_max(&self) -> usize {
        self.families.len()
    }

    pub fn gap(&self) -> usize {
        self.gap
    }

    pub fn mode(&self) -> BuildMode {
        self.mode
    }

    pub fn family(&self, level: usize) -> &SeparatedFamily {
        &self.families[level - 1]
    }

    pub fn copies(&self, level: usize) -> usize {
        self.copies[level - 1]
    }

    pub fn stats(&self) -> &[LevelStats] {
        &self.levels
    }

    /// `t_k`, the length of level-`k` leaves.
    pub fn t(&self, level: usize) -> usize {
        self.levels[level - 1].t
    }

    pub fn leaf_count(&self, level: usize) -> f64 {
        self.levels[level - 1].leaves
    }

    pub fn bridge(&self, a: u8, c: u8) -> &[u8] {
        &self.bridges[a as usize][c as usize]
    }

    /// Slots of a level-`k` leaf in left-to-right order.
    pub fn slots(&self, level: usize) -> Vec<Slot> {
        let mut out = Vec::new();
        let mut pos = 0;
        for lvl in 1..=level {
            let n = self.families[lvl - 1].word_length;
            for index in 0..self.copies[lvl - 1] {
                if !out.is_empty() {
                    pos += self.gap;
                }
                out.push(Slot {
                    level: lvl,
                    index,
                    start: pos,
                    len: n,
                });
                pos += n;
            }
        }
        out
    }

    /// Materializes the leaf with the given index word.
    pub fn leaf(&self, index: &LeafIndex) -> Word {
        let mut out: Vec<u8> = Vec::with_capacity(self.t(index.levels()));
        for (lvl, choices) in index.0.iter().enumerate() {
            let family = &self.families[lvl];
            for &c in choices {
                let w = family.words[c].symbols();
                if let Some(&a) = out.last() {
                    out.extend_from_slice(self.bridge(a, w[0]));
                }
                out.extend_from_slice(w);
            }
        }
        Word::from_symbols(out)
    }

    /// Every index word of level `k` in lexicographic order.
    pub fn all_indices(&self, level: usize) -> Vec<LeafIndex> {
        let mut out = vec![LeafIndex(Vec::new())];
        for lvl in 1..=level {
            let size = self.families[lvl - 1].words.len();
            let copies = self.copies[lvl - 1];
            let mut next = Vec::new();
            for base in &out {
                let mut choice = vec![0usize; copies];
                loop {
                    let mut ix = base.0.clone();
                    ix.push(choice.clone());
                    next.push(LeafIndex(ix));
                    let mut j = copies;
                    let done = loop {
                        if j == 0 {
                            break true;
                        }
                        j -= 1;
                        choice[j] += 1;
                        if choice[j] < size {
                            break false;
                        }
                        choice[j] = 0;
                    };
                    if done {
                        break;
                    }
                }
            }
            out = next;
        }
        out
    }

    /// A uniformly random index word of level `k`.
    pub fn sample_index(&self, level: usize, rng: &mut impl Rng) -> LeafIndex {
        LeafIndex(
            (1..=level)
                .map(|lvl| {
                    let size = self.families[lvl - 1].words.len();
                    (0..self.copies[lvl - 1]).map(|_| rng.gen_range(0..size)).collect()
                })
                .collect(),
        )
    }

    /// Stored leaves of level `k` in eager mode.
    pub fn level_leaves(&self, level: usize) -> Option<&[Word]> {
        self.eager.as_ref().map(|e| e[level - 1].as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moran::build_family;
    use crate::symbolic::Potential;

    #[test]
    fn glue_examples() {
        let full = ShiftSpace::full(2).unwrap();
        let w = |s: &str| full.parse_word(s).unwrap();
        assert_eq!(glue(&full, &[w("01"), w("10")]).unwrap().to_string(), "0110");
        assert_eq!(glue(&full, &[w("01")]).unwrap().to_string(), "01");
        let gm = ShiftSpace::golden_mean();
        let g = |s: &str| gm.parse_word(s).unwrap();
        assert_eq!(glue(&gm, &[g("1"), g("1")]).unwrap().to_string(), "1001");
        assert!(glue(&gm, &[Word::from_symbols(vec![1, 1])]).is_err());
    }

    fn tiny(
        space: &ShiftSpace,
        n: Vec<usize>,
        copies: Vec<usize>,
        deltas: Vec<f64>,
    ) -> (MoranConfig, Vec<SeparatedFamily>) {
        let phi = Potential::indicator(space, 1);
        let zero = Potential::constant(space, 0.0);
        let cfg = MoranConfig::for_tests(0.5, n, copies, deltas);
        let fams = (1..=cfg.k_max())
            .map(|k| build_family(space, &phi, &zero, k, &cfg).unwrap())
            .collect();
        (cfg, fams)
    }

    #[test]
    fn schedule_examples() {
        let full = ShiftSpace::full(2).unwrap();
        // n = 4: averages exactly 1/2 give 6 words, within 0.3 gives 14
        let (cfg, fams) = tiny(&full, vec![4, 4], vec![1, 2], vec![0.3, 0.2]);
        let s = build_scheme(&full, fams, &cfg, BuildMode::Eager).unwrap();
        let (a, b) = (s.family(1).size as f64, s.family(2).size as f64);
        assert_eq!(s.leaf_count(2), a * b * b);
        assert_eq!(s.t(1), 4);
        assert_eq!(s.t(2), 12);
        assert_eq!(s.level_leaves(2).unwrap().len() as f64, a * b * b);

        let gm = ShiftSpace::golden_mean();
        let (cfg, fams) = tiny(&gm, vec![4, 4], vec![1, 2], vec![0.3, 0.2]);
        let s = build_scheme(&gm, fams, &cfg, BuildMode::Lazy).unwrap();
        assert_eq!(s.stats()[1].c, 10);
        assert_eq!(s.t(2), s.t(1) + 2 + 10);
    }

    #[test]
    fn single_level_is_the_family() {
        let full = ShiftSpace::full(2).unwrap();
        let (cfg, fams) = tiny(&full, vec![6], vec![1], vec![0.2]);
        let words = fams[0].words.clone();
        let s = build_scheme(&full, fams, &cfg, BuildMode::Eager).unwrap();
        assert_eq!(s.t(1), 6);
        assert_eq!(s.level_leaves(1).unwrap(), words.as_slice());
    }

    #[test]
    fn budget_is_enforced() {
        let full = ShiftSpace::full(2).unwrap();
        let (mut cfg, fams) = tiny(&full, vec![8, 10], vec![1, 2], vec![0.5, 0.4]);
        cfg.leaf_budget = 1000;
        let e = build_scheme(&full, fams.clone(), &cfg, BuildMode::Eager);
        assert!(matches!(e, Err(Error::BudgetExceeded { .. })));
        assert!(build_scheme(&full, fams, &cfg, BuildMode::Lazy).is_ok());
    }

    #[test]
    fn leaves_follow_slots() {
        let gm = ShiftSpace::golden_mean();
        let (cfg, fams) = tiny(&gm, vec![5, 6], vec![2, 2], vec![0.4, 0.3]);
        let s = build_scheme(&gm, fams, &cfg, BuildMode::Lazy).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        use rand::SeedableRng;
        for _ in 0..50 {
            let ix = s.sample_index(2, &mut rng);
            let leaf = s.leaf(&ix);
            assert_eq!(leaf.len(), s.t(2));
            assert!(gm.is_admissible(leaf.symbols()));
            for slot in s.slots(2) {
                let w = &s.family(slot.level).words[ix.0[slot.level - 1][slot.index]];
                assert_eq!(&leaf.symbols()[slot.start..slot.start + slot.len], w.symbols());
            }
        }
    }
}
