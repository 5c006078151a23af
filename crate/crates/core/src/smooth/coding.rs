//! Level spectrum of the MP map through its coding by the full 2-shift.
//!
//! Each depth-`n` cylinder is represented by the point obtained by pulling
//! `1/2` back along its itinerary; its orbit is the chain of intermediate
//! pullbacks, so no forward iteration is needed. Cylinders are counted, not
//! weighted by derivatives, which is why the output is labelled
//! distortion-uncorrected.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::smooth::{FullBranchMap, MPMap, Observable};
use crate::thermo::{DeltaSchedule, LevelSum, NRange, PressureEstimate, SpectrumCurve, SpectrumPoint};

/// Deepest cylinders enumerated (`2^22` of them).
pub const MAX_CODING_DEPTH: usize = 22;

pub const CODING_METHOD: &str = "coding-based, distortion-uncorrected";

// subtrees below this depth are handed to separate workers
const SPLIT_DEPTH: usize = 6;

struct Counter<'a> {
    map: &'a MPMap,
    obs: &'a Observable,
    n_range: NRange,
    targets: &'a [(f64, Vec<f64>)],
}

impl Counter<'_> {
    /// Adds, for every depth in range, the cylinders whose average hits each target.
    fn tally(&self, depth: usize, sum: f64, counts: &mut [u64]) {
        if depth < self.n_range.min || depth > self.n_range.max {
            return;
        }
        let row = depth - self.n_range.min;
        let avg = sum / depth as f64;
        for (i, (alpha, deltas)) in self.targets.iter().enumerate() {
            if (avg - alpha).abs() <= deltas[row] + 1e-12 {
                counts[i * self.n_range.len() + row] += 1;
            }
        }
    }

    fn descend(&self, y: f64, depth: usize, sum: f64, counts: &mut [u64]) {
        for b in 0..2 {
            let x = self.map.inverse(b, y);
            let s = sum + self.obs.eval(x);
            self.tally(depth + 1, s, counts);
            if depth + 1 < self.n_range.max {
                self.descend(x, depth + 1, s, counts);
            }
        }
    }
}

/// Restricted cylinder counts `#{|w| = n : |S_n f / n − α| ≤ δ_n}` for the
/// MP coding, turned into slopes in `n` for each target `α`.
pub fn mp_level_spectrum(
    map: &MPMap,
    obs: &Observable,
    alphas: &[f64],
    schedule: &DeltaSchedule,
    n_range: NRange,
) -> Result<SpectrumCurve> {
    schedule.validate()?;
    if n_range.max > MAX_CODING_DEPTH {
        return Err(Error::InvalidArgument(format!(
            "coding depth {} exceeds {MAX_CODING_DEPTH}",
            n_range.max
        )));
    }
    let range = obs.range((0.0, 1.0));
    let feasible: Vec<bool> = alphas
        .iter()
        .map(|&a| a >= range.0 - 1e-12 && a <= range.1 + 1e-12)
        .collect();
    let targets: Vec<(f64, Vec<f64>)> = alphas
        .iter()
        .map(|&a| (a, n_range.iter().map(|n| schedule.delta(n, a, range)).collect()))
        .collect();
    let counter = Counter {
        map,
        obs,
        n_range,
        targets: &targets,
    };
    let cells = alphas.len() * n_range.len();

    // shallow cylinders serially, then one worker per subtree
    let split = SPLIT_DEPTH.min(n_range.max);
    let mut counts = vec![0u64; cells];
    let mut frontier = vec![(0.5, 0.0)];
    for depth in 0..split {
        let mut next = Vec::with_capacity(2 * frontier.len());
        for &(y, sum) in &frontier {
            for b in 0..2 {
                let x = map.inverse(b, y);
                let s = sum + obs.eval(x);
                counter.tally(depth + 1, s, &mut counts);
                next.push((x, s));
            }
        }
        frontier = next;
    }
    if split < n_range.max {
        let parts: Vec<Vec<u64>> = frontier
            .par_iter()
            .map(|&(y, sum)| {
                let mut c = vec![0u64; cells];
                counter.descend(y, split, sum, &mut c);
                c
            })
            .collect();
        for part in parts {
            for (c, p) in counts.iter_mut().zip(part) {
                *c += p;
            }
        }
    }

    let mut points = Vec::with_capacity(alphas.len());
    for (i, &alpha) in alphas.iter().enumerate() {
        if !feasible[i] {
            points.push(SpectrumPoint::infeasible(alpha));
            continue;
        }
        let sums: Vec<LevelSum> = n_range
            .iter()
            .enumerate()
            .map(|(row, n)| {
                let c = counts[i * n_range.len() + row];
                LevelSum {
                    n,
                    log_sum: (c > 0).then(|| (c as f64).ln()),
                    words: c,
                }
            })
            .collect();
        let endpoint = (alpha - range.0).abs() <= 1e-12 || (alpha - range.1).abs() <= 1e-12;
        match PressureEstimate::fit(n_range, sums) {
            Ok(est) => points.push(SpectrumPoint {
                alpha,
                value: Some(est.value),
                q: None,
                feasible: true,
                endpoint,
            }),
            Err(Error::LevelNotWitnessed) => points.push(SpectrumPoint::infeasible(alpha)),
            Err(e) => return Err(e),
        }
    }
    Ok(SpectrumCurve {
        points,
        method: CODING_METHOD.into(),
        pressure_bound: Some(2f64.ln()),
    })
}
