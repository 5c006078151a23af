//! Numerical checks of the construction: family growth, separation and
//! nesting of the leaves, convergence of leaf averages, and the exponential
//! ball bound behind the pressure distribution principle.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::moran::{build_family, LeafIndex, MoranConfig, MoranMeasure, MoranScheme};
use crate::symbolic::{Potential, ShiftMetric, ShiftSpace, Word};

/// Per-level comparison of `(1/n_k) log M_k` with `C − γ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyGrowth {
    pub level: usize,
    pub n: usize,
    pub per_symbol: f64,
    pub target: f64,
    pub pass: bool,
    /// Smallest `n*` such that the bound holds for every length from `n*`
    /// to `n_k` at this level's `δ_k`; `None` if it fails at `n_k`.
    pub n_star: Option<usize>,
}

/// Checks `(1/n) log M ≥ C − γ` at every level and scans shorter word
/// lengths for the threshold `n*`.
pub fn family_growth(
    space: &ShiftSpace,
    phi: &Potential,
    psi: &Potential,
    config: &MoranConfig,
    c: f64,
) -> Result<Vec<FamilyGrowth>> {
    let target = c - config.gamma;
    let mut out = Vec::new();
    for level in 1..=config.k_max() {
        let n_k = config.word_lengths[level - 1];
        let mut n_star = None;
        let mut per_symbol_at_nk = f64::NEG_INFINITY;
        for n in (phi.memory().max(psi.memory()).max(1)..=n_k).rev() {
            let mut probe = config.clone();
            probe.word_lengths[level - 1] = n;
            probe.min_lengths = (1..=config.k_max()).collect();
            let per_symbol = match build_family(space, phi, psi, level, &probe) {
                Ok(f) => f.per_symbol,
                Err(_) => f64::NEG_INFINITY,
            };
            if n == n_k {
                per_symbol_at_nk = per_symbol;
            }
            if per_symbol >= target {
                n_star = Some(n);
            } else {
                break;
            }
        }
        out.push(FamilyGrowth {
            level,
            n: n_k,
            per_symbol: per_symbol_at_nk,
            target,
            pass: per_symbol_at_nk >= target,
            n_star,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    /// `exhaustive` compares stored leaves; `factored` checks the
    /// ingredients that make every leaf distinct and nested.
    pub mode: String,
    pub separation: bool,
    pub nesting: bool,
    pub nesting_vacuous: bool,
    pub checked: u64,
    pub witness: Option<String>,
    pub pass: bool,
}

/// Leaves of each level are `(t_k, 2ε)`-separated and each level-`(k+1)`
/// leaf extends its parent.
///
/// Eager schemes are checked leaf by leaf. Lazy schemes are checked through
/// the facts the property rests on: distinct family words, every slot
/// window holding its word, admissible bridges, and prefix preservation for
/// every pair of boundary symbols; sampled leaves are checked directly too.
pub fn verify_separation_nesting(
    scheme: &MoranScheme,
    eps: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> SeparationReport {
    let metric = ShiftMetric::default();
    let k_max = scheme.k_max();
    let mut report = SeparationReport {
        mode: String::new(),
        separation: true,
        nesting: true,
        nesting_vacuous: k_max == 1,
        checked: 0,
        witness: None,
        pass: false,
    };
    // leaves are separated iff they differ on this many leading symbols
    let key_len = |t: usize| metric.bowen_depth(t, 2.0 * eps).min(t);
    let fail = |report: &mut SeparationReport, what: &str, detail: String, sep: bool| {
        if sep {
            report.separation = false;
        } else {
            report.nesting = false;
        }
        if report.witness.is_none() {
            report.witness = Some(format!("{what}: {detail}"));
        }
    };

    if scheme.level_leaves(1).is_some() {
        report.mode = "exhaustive".into();
        for k in 1..=k_max {
            let leaves = scheme.level_leaves(k).expect("eager scheme");
            let t = scheme.t(k);
            let mut seen: HashSet<&[u8]> = HashSet::with_capacity(leaves.len());
            for w in leaves {
                report.checked += 1;
                if !seen.insert(&w.symbols()[..key_len(t)]) {
                    fail(&mut report, "separation", format!("level {k} repeats {w}"), true);
                }
            }
            if k < k_max {
                let children = scheme.level_leaves(k + 1).expect("eager scheme");
                let per_parent = children.len() / leaves.len();
                for (i, child) in children.iter().enumerate() {
                    report.checked += 1;
                    let parent = &leaves[i / per_parent];
                    if child.symbols()[..t] != *parent.symbols() {
                        fail(
                            &mut report,
                            "nesting",
                            format!("{child} does not extend {parent}"),
                            false,
                        );
                    }
                }
            }
        }
        report.pass = report.separation && report.nesting;
        return report;
    }

    report.mode = "factored".into();
    let space = scheme.space();
    let gap = scheme.gap();
    let k = space.alphabet_size() as u8;
    for a in 0..k {
        for c in 0..k {
            let b = scheme.bridge(a, c);
            let mut w = vec![a];
            w.extend_from_slice(b);
            w.push(c);
            report.checked += 1;
            if b.len() != gap || !space.is_admissible(&w) {
                fail(&mut report, "bridge", format!("{a} {b:?} {c}"), true);
            }
        }
    }
    for level in 1..=k_max {
        let fam = scheme.family(level);
        let t = scheme.t(level);
        // the last level of a leaf may be cut short by the separation depth
        let cut = t - key_len(t);
        let mut seen: HashSet<&[u8]> = HashSet::new();
        for w in &fam.words {
            report.checked += 1;
            if !seen.insert(&w.symbols()[..w.len() - cut]) {
                fail(
                    &mut report,
                    "separation",
                    format!("level {level} family repeats {w}"),
                    true,
                );
            }
        }
        let base: Vec<Vec<usize>> = (1..=level).map(|l| vec![0; scheme.copies(l)]).collect();
        for slot in scheme.slots(level).into_iter().filter(|s| s.level == level) {
            for (i, w) in fam.words.iter().enumerate() {
                let mut ix = base.clone();
                ix[level - 1][slot.index] = i;
                let leaf = scheme.leaf(&LeafIndex(ix));
                report.checked += 1;
                if leaf.symbols()[slot.start..slot.start + slot.len] != *w.symbols()
                    || !space.is_admissible(leaf.symbols())
                {
                    fail(
                        &mut report,
                        "window",
                        format!("level {level} slot {} word {w}", slot.index),
                        true,
                    );
                }
            }
        }
    }
    for level in 1..k_max {
        let lasts: BTreeSet<u8> = scheme.family(level).words.iter().filter_map(Word::last).collect();
        let firsts: BTreeSet<u8> = scheme.family(level + 1).words.iter().filter_map(Word::first).collect();
        for &a in &lasts {
            for &c in &firsts {
                let mut ix: Vec<Vec<usize>> = (1..=level + 1).map(|l| vec![0; scheme.copies(l)]).collect();
                let last_slot = scheme.copies(level) - 1;
                ix[level - 1][last_slot] = scheme
                    .family(level)
                    .words
                    .iter()
                    .position(|w| w.last() == Some(a))
                    .expect("class member");
                ix[level][0] = scheme
                    .family(level + 1)
                    .words
                    .iter()
                    .position(|w| w.first() == Some(c))
                    .expect("class member");
                let index = LeafIndex(ix);
                let child = scheme.leaf(&index);
                let parent = scheme.leaf(&index.truncate(level));
                report.checked += 1;
                if child.symbols()[..parent.len()] != *parent.symbols() {
                    fail(
                        &mut report,
                        "nesting",
                        format!("{child} does not extend {parent}"),
                        false,
                    );
                }
            }
        }
    }
    for _ in 0..samples {
        let index = scheme.sample_index(k_max, rng);
        let leaf = scheme.leaf(&index);
        for level in 1..k_max {
            let parent = scheme.leaf(&index.truncate(level));
            report.checked += 1;
            if leaf.symbols()[..parent.len()] != *parent.symbols() {
                fail(
                    &mut report,
                    "nesting",
                    format!("{leaf} does not extend {parent}"),
                    false,
                );
            }
        }
    }
    report.pass = report.separation && report.nesting;
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelDeviation {
    pub level: usize,
    pub t: usize,
    pub max_deviation: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelDeviation>,
    pub deviations_nonincreasing: bool,
    pub bounds_nonincreasing: bool,
    pub samples: usize,
    pub pass: bool,
}

/// Traces leaves through the levels and compares `|S_{t_k}φ / t_k − α|` with
/// `δ_k + Var(φ, ε/2^k) + g‖φ‖·(slots_k − 1)/t_k + 1/k`.
///
/// Besides `samples` uniform leaves, the two extremal leaves (every slot
/// holding its largest or smallest `φ`-average word) are always included.
pub fn verify_level_convergence(
    scheme: &MoranScheme,
    phi: &Potential,
    config: &MoranConfig,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<ConvergenceReport> {
    let k_max = scheme.k_max();
    let metric = ShiftMetric::default();
    let mut indices: Vec<LeafIndex> = (0..samples).map(|_| scheme.sample_index(k_max, rng)).collect();
    for pick_max in [true, false] {
        let ix = (1..=k_max)
            .map(|lvl| {
                let avgs = &scheme.family(lvl).phi_averages;
                let best = (0..avgs.len())
                    .reduce(|a, b| {
                        let better = if pick_max { avgs[b] > avgs[a] } else { avgs[b] < avgs[a] };
                        if better {
                            b
                        } else {
                            a
                        }
                    })
                    .expect("nonempty family");
                vec![best; scheme.copies(lvl)]
            })
            .collect();
        indices.push(LeafIndex(ix));
    }
    let deviations: Vec<Vec<f64>> = indices
        .par_iter()
        .map(|ix| {
            (1..=k_max)
                .map(|lvl| {
                    let w = scheme.leaf(&ix.truncate(lvl));
                    phi.birkhoff_average(&w).map(|a| (a - config.alpha).abs())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut levels = Vec::with_capacity(k_max);
    let mut slots = 0;
    for lvl in 1..=k_max {
        slots += scheme.copies(lvl);
        let t = scheme.t(lvl);
        let max_deviation = deviations.iter().map(|d| d[lvl - 1]).fold(0.0, f64::max);
        let bound = config.deltas[lvl - 1]
            + phi.variation(&metric, config.eps / 2f64.powi(lvl as i32))
            + scheme.gap() as f64 * phi.sup_norm() * (slots - 1) as f64 / t as f64
            + 1.0 / lvl as f64;
        levels.push(LevelDeviation {
            level: lvl,
            t,
            max_deviation,
            bound,
            within_bound: max_deviation <= bound,
        });
    }
    let deviations_nonincreasing = levels
        .windows(2)
        .all(|w| w[1].max_deviation <= w[0].max_deviation + 1e-12);
    let bounds_nonincreasing = levels.windows(2).all(|w| w[1].bound <= w[0].bound + 1e-12);
    let pass = deviations_nonincreasing && bounds_nonincreasing && levels.iter().all(|l| l.within_bound);
    Ok(ConvergenceReport {
        levels,
        deviations_nonincreasing,
        bounds_nonincreasing,
        samples: indices.len(),
        pass,
    })
}

/// A Bowen ball `B_n(center, ε/2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub center: Word,
    pub n: usize,
}

/// Depth of the cylinder equal to `B_n(q, ε/2)`.
pub fn ball_depth(n: usize, eps: f64) -> usize {
    ShiftMetric::default().bowen_depth(n, eps / 2.0)
}

/// `count` balls centered at uniformly chosen leaves with `n` uniform in
/// `[n_min, n_max]`.
pub fn sample_balls(measure: &MoranMeasure, n_min: usize, n_max: usize, count: usize, rng: &mut impl Rng) -> Vec<Ball> {
    let scheme = measure.scheme();
    (0..count)
        .map(|_| {
            let ix = scheme.sample_index(measure.level(), rng);
            Ball {
                center: scheme.leaf(&ix),
                n: rng.gen_range(n_min..=n_max),
            }
        })
        .collect()
}

/// Largest `n` whose ball depth fits inside a level-`k` leaf.
pub fn max_ball_n(measure: &MoranMeasure, eps: f64) -> usize {
    let t = measure.scheme().t(measure.level());
    let extra = ball_depth(1, eps) - 1;
    t.saturating_sub(extra)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdpReport {
    pub s: f64,
    pub eps: f64,
    pub balls: usize,
    pub skipped: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// `log K = max(0, max over balls of log μ(B) + n s − S_n ψ(q))`.
    pub log_k: f64,
    /// Largest `log μ(B) + n s − S_nψ(q) − log K`; at most zero by construction.
    pub max_violation: f64,
    /// Per `n`: the largest `log μ(B) + n s − S_n ψ(q)`.
    pub per_n: Vec<(usize, f64)>,
    pub log_k_limit: f64,
    pub pass: bool,
}

/// Fits one constant `K ≥ 1` with `μ(B_n(q, ε/2)) ≤ K exp(−n s + S_n ψ(q))`
/// over the sampled balls and accepts when `log K ≤ 0.1 · n_max`.
/// Balls that miss every leaf have mass zero and are skipped.
pub fn verify_pdp(measure: &MoranMeasure, s: f64, psi: &Potential, eps: f64, balls: &[Ball]) -> Result<PdpReport> {
    let results: Vec<Option<(usize, f64)>> = balls
        .par_iter()
        .map(|b| {
            let depth = ball_depth(b.n, eps);
            let mass = measure.cylinder_mass(&b.center.symbols()[..depth.min(b.center.len())])?;
            if mass <= 0.0 {
                return Ok(None);
            }
            let s_n = psi.orbit_sum(b.center.symbols(), b.n)?;
            Ok(Some((b.n, mass.ln() + b.n as f64 * s - s_n)))
        })
        .collect::<Result<_>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let used: Vec<(usize, f64)> = results.into_iter().flatten().collect();
    let worst = used.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let log_k = worst.max(0.0);
    let mut per_n: Vec<(usize, f64)> = Vec::new();
    for &(n, v) in &used {
        match per_n.iter_mut().find(|p| p.0 == n) {
            Some(p) => p.1 = p.1.max(v),
            None => per_n.push((n, v)),
        }
    }
    per_n.sort_by_key(|p| p.0);
    let n_min = used.iter().map(|r| r.0).min().unwrap_or(0);
    let n_max = used.iter().map(|r| r.0).max().unwrap_or(0);
    let log_k_limit = 0.1 * n_max as f64;
    Ok(PdpReport {
        s,
        eps,
        balls: balls.len(),
        skipped,
        n_min,
        n_max,
        log_k,
        max_violation: if used.is_empty() { 0.0 } else { worst - log_k },
        per_n,
        log_k_limit,
        pass: log_k <= log_k_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moran::{build_scheme, moran_measure, BuildMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(space: &ShiftSpace, n: Vec<usize>, copies: Vec<usize>, mode: BuildMode) -> (MoranConfig, MoranScheme) {
        let phi = Potential::indicator(space, 1);
        let zero = Potential::constant(space, 0.0);
        let deltas = (1..=n.len()).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let cfg = MoranConfig::for_tests(0.5, n, copies, deltas);
        let fams = (1..=cfg.k_max())
            .map(|k| build_family(space, &phi, &zero, k, &cfg).unwrap())
            .collect();
        let s = build_scheme(space, fams, &cfg, mode).unwrap();
        (cfg, s)
    }

    #[test]
    fn separation_and_nesting_eager_and_factored_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for space in [ShiftSpace::full(2).unwrap(), ShiftSpace::golden_mean()] {
            let (_, eager) = setup(&space, vec![4, 5], vec![1, 2], BuildMode::Eager);
            let (_, lazy) = setup(&space, vec![4, 5], vec![1, 2], BuildMode::Lazy);
            let a = verify_separation_nesting(&eager, 0.5, 0, &mut rng);
            let b = verify_separation_nesting(&lazy, 0.5, 100, &mut rng);
            assert_eq!(a.mode, "exhaustive");
            assert_eq!(b.mode, "factored");
            assert!(a.pass && b.pass, "{a:?} {b:?}");
        }
    }

    #[test]
    fn single_level_nesting_is_vacuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, s) = setup(&ShiftSpace::full(2).unwrap(), vec![6], vec![1], BuildMode::Eager);
        let r = verify_separation_nesting(&s, 0.5, 0, &mut rng);
        assert!(r.nesting_vacuous && r.pass);
    }

    #[test]
    fn coarse_eps_needs_distinct_shorter_prefixes() {
        // with 2ε > 1 words differing only in their last symbol are too close
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (_, s) = setup(&ShiftSpace::full(2).unwrap(), vec![4], vec![1], BuildMode::Eager);
        let r = verify_separation_nesting(&s, 0.75, 0, &mut rng);
        assert!(!r.separation);
        assert!(r.witness.is_some());
    }

    #[test]
    fn convergence_on_exact_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let full = ShiftSpace::full(2).unwrap();
        let phi = Potential::indicator(&full, 1);
        let zero = Potential::constant(&full, 0.0);
        let cfg = MoranConfig::for_tests(0.5, vec![4, 6], vec![1, 2], vec![0.1, 0.05]);
        let fams = (1..=2)
            .map(|k| build_family(&full, &phi, &zero, k, &cfg).unwrap())
            .collect();
        let s = build_scheme(&full, fams, &cfg, BuildMode::Lazy).unwrap();
        let r = verify_level_convergence(&s, &phi, &cfg, 50, &mut rng).unwrap();
        assert!(r.levels.iter().all(|l| l.max_deviation == 0.0));
        assert!(r.pass);
    }

    #[test]
    fn point_mass_fits_k() {
        let full = ShiftSpace::full(2).unwrap();
        let phi = Potential::indicator(&full, 1);
        let zero = Potential::constant(&full, 0.0);
        let cfg = MoranConfig::for_tests(1.0, vec![6], vec![1], vec![0.01]);
        let fams = vec![build_family(&full, &phi, &zero, 1, &cfg).unwrap()];
        let s = build_scheme(&full, fams, &cfg, BuildMode::Eager).unwrap();
        let mu = moran_measure(&s, &zero, 1).unwrap();
        let center = s.level_leaves(1).unwrap()[0].clone();
        let balls = vec![
            Ball {
                center: center.clone(),
                n: 2,
            },
            Ball { center, n: 4 },
        ];
        let r = verify_pdp(&mu, 0.3, &zero, 0.5, &balls).unwrap();
        // μ = 1 on every ball, so K must absorb e^{n s} at the largest n
        assert!((r.log_k - 4.0 * 0.3).abs() < 1e-12);
        assert_eq!(r.max_violation, 0.0);

        let away = Ball {
            center: full.parse_word("000000").unwrap(),
            n: 2,
        };
        let r = verify_pdp(&mu, 0.3, &zero, 0.5, &[away]).unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.log_k, 0.0);
    }
}
