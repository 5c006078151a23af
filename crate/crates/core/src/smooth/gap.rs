//! Empirical specification gaps for full-branch interval maps.
//!
//! Given two orbit segments, the smallest gap `p` is searched for such that
//! some point `ε`-shadows the first segment and, `p` steps after it ends,
//! the second. Candidate sets come from pulling the second segment's
//! `ε`-tube back through inverse branches, pruned by the forward images of
//! the first segment's tube. Every reported witness is then checked along
//! its forward orbit with a running rounding-error bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::smooth::{FullBranchMap, IntervalSet};

/// Largest forward-orbit error bound a verified witness may carry.
pub const VERIFY_TOL: f64 = 1e-9;

// candidate points tried per gap before moving on
const MAX_CANDIDATES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub start: f64,
    pub len: usize,
}

/// A shadowing point and its checked orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub z: f64,
    /// Largest distance to the segment orbits over both windows.
    pub max_distance: f64,
    /// `ε − max_distance`.
    pub margin: f64,
    /// Bound on the accumulated rounding error of the computed orbit.
    pub error_bound: f64,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapAttempt {
    pub p: usize,
    /// Pieces and total length of the candidate set.
    pub pieces: usize,
    pub measure: f64,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub map: String,
    pub eps: f64,
    pub segments: Vec<Segment>,
    pub p_max: usize,
    /// Smallest gap with a verified witness; `None` when `p_max` ran out.
    pub gap: Option<usize>,
    pub witness: Option<Witness>,
    pub attempts: Vec<GapAttempt>,
    pub failure: Option<String>,
}

fn orbit<M: FullBranchMap + ?Sized>(map: &M, x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut y = x;
    for _ in 0..n {
        out.push(y);
        y = map.apply(y);
    }
    out
}

/// Points whose first `o.len()` iterates stay within `eps` of `o`,
/// together with the tube at every step.
fn shadow_set<M: FullBranchMap + ?Sized>(map: &M, o: &[f64], eps: f64) -> (IntervalSet, Vec<IntervalSet>) {
    let tubes: Vec<IntervalSet> = o.iter().map(|&c| map.tube(c, eps)).collect();
    let mut set = tubes[o.len() - 1].clone();
    for i in (0..o.len() - 1).rev() {
        set = tubes[i].intersect(&map.pullback(&set));
    }
    (set, tubes)
}

/// Forward orbit of `z` against both windows, with a rounding bound that
/// grows by `|T'|` and the local rounding error at each step.
fn check_witness<M: FullBranchMap + ?Sized>(
    map: &M,
    z: f64,
    first: &[f64],
    second: &[f64],
    p: usize,
    eps: f64,
) -> Witness {
    let total = first.len() + p + second.len();
    let mut x = z;
    let mut bound = 0.0f64;
    let mut worst = 0.0f64;
    for i in 0..total {
        let target = if i < first.len() {
            Some(first[i])
        } else if i >= first.len() + p {
            Some(second[i - first.len() - p])
        } else {
            None
        };
        if let Some(t) = target {
            worst = worst.max(map.distance(x, t));
        }
        if i + 1 == total {
            break;
        }
        let (lo, hi) = ((x - bound).max(0.0), (x + bound).min(1.0));
        let branch = |v: f64| (0..map.branch_count()).find(|&b| v <= map.branch_domain(b).1);
        bound = if branch(lo) != branch(hi) {
            // the error interval straddles a discontinuity
            f64::INFINITY
        } else {
            let slope = map.derivative(lo).max(map.derivative(hi)).max(map.derivative(x));
            let next = map.apply(x);
            slope * bound + 4.0 * f64::EPSILON * next.abs()
        };
        x = map.apply(x);
    }
    let margin = eps - worst;
    Witness {
        z,
        max_distance: worst,
        margin,
        error_bound: bound,
        verified: bound <= VERIFY_TOL && margin > bound,
    }
}

/// Smallest `p ≤ p_max` for which a verified point `ε`-shadows both
/// segments with `p` free steps between them. Running out of gaps is
/// reported in the result, not as an error.
pub fn spec_gap_estimate<M: FullBranchMap + ?Sized>(
    map: &M,
    segments: &[Segment],
    eps: f64,
    p_max: usize,
) -> Result<GapReport> {
    if segments.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected two segments, got {}",
            segments.len()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    for s in segments {
        if s.len == 0 || !(0.0..=1.0).contains(&s.start) {
            return Err(Error::InvalidArgument(format!(
                "segment needs a start in [0, 1] and positive length, got ({}, {})",
                s.start, s.len
            )));
        }
    }
    let o1 = orbit(map, segments[0].start, segments[0].len);
    let o2 = orbit(map, segments[1].start, segments[1].len);
    let (first_set, tubes1) = shadow_set(map, &o1, eps);
    let (second_set, _) = shadow_set(map, &o2, eps);

    // reach[i]: where step i of a first-window shadow can be
    let mut reach = vec![first_set.clone()];
    for tube in &tubes1[1..] {
        let next = map.image(reach.last().expect("nonempty")).intersect(tube);
        reach.push(next);
    }
    // free[k]: where step n1 + k can be
    let mut free = vec![map.image(reach.last().expect("nonempty"))];
    for _ in 0..p_max {
        let next = map.image(free.last().expect("nonempty"));
        free.push(next);
    }

    let mut attempts = Vec::new();
    for p in 0..=p_max {
        let mut set = second_set.intersect(&free[p]);
        for k in (0..p).rev() {
            set = map.pullback(&set).intersect(&free[k]);
        }
        for r in reach.iter().rev() {
            set = map.pullback(&set).intersect(r);
        }
        let mut candidates = Vec::new();
        if set.contains(segments[0].start) {
            candidates.push(segments[0].start);
        }
        let mut pieces = set.pieces().to_vec();
        pieces.sort_by(|a, b| b.width().total_cmp(&a.width()));
        candidates.extend(pieces.iter().take(MAX_CANDIDATES).map(|p| p.midpoint().clamp(0.0, 1.0)));
        let witness = candidates
            .into_iter()
            .map(|z| check_witness(map, z, &o1, &o2, p, eps))
            .find(|w| w.verified);
        attempts.push(GapAttempt {
            p,
            pieces: set.len(),
            measure: set.measure(),
            verified: witness.is_some(),
        });
        if let Some(w) = witness {
            return Ok(GapReport {
                map: map.name(),
                eps,
                segments: segments.to_vec(),
                p_max,
                gap: Some(p),
                witness: Some(w),
                attempts,
                failure: None,
            });
        }
    }
    let unverified = attempts.iter().filter(|a| a.pieces > 0).count();
    Ok(GapReport {
        map: map.name(),
        eps,
        segments: segments.to_vec(),
        p_max,
        gap: None,
        witness: None,
        attempts,
        failure: Some(format!(
            "no verified witness for p in 0..={p_max}; {unverified} gaps had candidate sets that failed the orbit check"
        )),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepEntry {
    pub n: usize,
    pub gap: Option<usize>,
    /// `p(n) / n`.
    pub ratio: Option<f64>,
    pub witness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapSweep {
    pub map: String,
    pub eps: f64,
    pub first_start: f64,
    pub second: Segment,
    pub entries: Vec<SweepEntry>,
    /// Every gap was found and `p(n)/n` never increases along the sweep.
    pub nonincreasing: bool,
}

/// Gap estimates for first segments `(first_start, n)` of growing length
/// followed by a fixed second segment.
pub fn gap_sweep<M: FullBranchMap + ?Sized>(
    map: &M,
    first_start: f64,
    ns: &[usize],
    second: Segment,
    eps: f64,
    p_max: usize,
) -> Result<GapSweep> {
    let mut entries = Vec::with_capacity(ns.len());
    for &n in ns {
        let first = Segment {
            start: first_start,
            len: n,
        };
        let rep = spec_gap_estimate(map, &[first, second], eps, p_max)?;
        entries.push(SweepEntry {
            n,
            gap: rep.gap,
            ratio: rep.gap.map(|p| p as f64 / n as f64),
            witness: rep.witness.map(|w| w.z),
        });
    }
    let ratios: Option<Vec<f64>> = entries.iter().map(|e| e.ratio).collect();
    let nonincreasing = ratios.is_some_and(|r| r.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    Ok(GapSweep {
        map: map.name(),
        eps,
        first_start,
        second,
        entries,
        nonincreasing,
    })
}
