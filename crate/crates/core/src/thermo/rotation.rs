//! Extreme mean cycle weights (Karp's algorithm) and their witness cycles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Potential, ShiftSpace, Word};
use crate::thermo::edge_weights;

// ties within this tolerance are broken toward the smaller vertex index
const TIE_TOL: f64 = 1e-12;

/// The closed interval of values `∫φ dν` over invariant measures, with
/// periodic orbits realizing both ends.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationInterval {
    pub min: f64,
    pub max: f64,
    pub min_cycle: Word,
    pub max_cycle: Word,
}

impl RotationInterval {
    pub fn contains(&self, alpha: f64, tol: f64) -> bool {
        alpha >= self.min - tol && alpha <= self.max + tol
    }

    pub fn is_degenerate(&self, tol: f64) -> bool {
        self.max - self.min <= tol
    }
}

/// Minimum and maximum mean weight of a cycle in the transition graph
/// weighted by `pot` (memory at most two).
pub fn rotation_interval(space: &ShiftSpace, pot: &Potential) -> Result<RotationInterval> {
    let w = edge_weights(pot)?;
    let k = space.alphabet_size();
    let (max, max_cycle) = max_mean_cycle(k, &w)?;
    let neg: Vec<f64> = w.iter().map(|&x| if x.is_finite() { -x } else { x }).collect();
    let (neg_min, min_cycle) = max_mean_cycle(k, &neg)?;
    Ok(RotationInterval {
        min: -neg_min,
        max,
        min_cycle: Word::from_symbols(min_cycle),
        max_cycle: Word::from_symbols(max_cycle),
    })
}

/// Mean weight of the cycle `c_0 -> c_1 -> ... -> c_0`.
pub fn cycle_mean(k: usize, w: &[f64], cycle: &[u8]) -> f64 {
    let n = cycle.len();
    (0..n)
        .map(|i| w[cycle[i] as usize * k + cycle[(i + 1) % n] as usize])
        .sum::<f64>()
        / n as f64
}

/// Karp's value `max_v min_j (D_k(v) - D_j(v)) / (k - j)` with every vertex
/// as a source, followed by extraction of a cycle attaining it.
///
/// `-inf` marks a missing edge. Returns the witness cycle's own mean, which
/// agrees with the Karp value up to rounding.
pub fn max_mean_cycle(k: usize, w: &[f64]) -> Result<(f64, Vec<u8>)> {
    let neg = f64::NEG_INFINITY;
    // d[j][v]: heaviest walk with j edges ending at v
    let mut d = vec![vec![neg; k]; k + 1];
    d[0].iter_mut().for_each(|x| *x = 0.0);
    for j in 1..=k {
        for v in 0..k {
            let mut best = neg;
            for u in 0..k {
                let e = w[u * k + v];
                if e > neg && d[j - 1][u] > neg {
                    best = best.max(d[j - 1][u] + e);
                }
            }
            d[j][v] = best;
        }
    }
    let mut lambda = neg;
    for v in 0..k {
        if d[k][v] == neg {
            continue;
        }
        let worst = (0..k)
            .filter(|&j| d[j][v] > neg)
            .map(|j| (d[k][v] - d[j][v]) / (k - j) as f64)
            .fold(f64::INFINITY, f64::min);
        lambda = lambda.max(worst);
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidShift("transition graph has no cycle".into()));
    }
    let cycle = tight_cycle(k, w, lambda);
    Ok((cycle_mean(k, w, &cycle), cycle))
}

/// A simple cycle of mean `lambda` when every cycle has mean at most `lambda`.
///
/// With `w' = w - lambda` the heaviest-walk potentials `p` satisfy
/// `p(v) >= p(u) + w'(u,v)`, with equality along every optimal cycle. The
/// search restricts to such tight edges and takes the cycle through the
/// smallest vertex that lies on one, following smallest indices first.
fn tight_cycle(k: usize, w: &[f64], lambda: f64) -> Vec<u8> {
    let neg = f64::NEG_INFINITY;
    let mut p = vec![0.0f64; k];
    for _ in 0..=k {
        let mut next = p.clone();
        for u in 0..k {
            for v in 0..k {
                let e = w[u * k + v];
                if e > neg {
                    next[v] = next[v].max(p[u] + e - lambda);
                }
            }
        }
        p = next;
    }
    let scale = 1.0 + w.iter().filter(|x| x.is_finite()).fold(0.0f64, |a, x| a.max(x.abs()));
    let mut tol = TIE_TOL * scale * k as f64;
    loop {
        let tight = |u: usize, v: usize| {
            let e = w[u * k + v];
            e > neg && p[u] + e - lambda >= p[v] - tol
        };
        for start in 0..k {
            if let Some(c) = shortest_return(k, start, &tight) {
                return c;
            }
        }
        // rounding left no closed tight cycle; widen the tolerance
        tol *= 10.0;
    }
}

/// Breadth-first search for the shortest cycle through `start`, preferring
/// smaller vertex indices at each step.
fn shortest_return(k: usize, start: usize, edge: &impl Fn(usize, usize) -> bool) -> Option<Vec<u8>> {
    let mut parent = vec![usize::MAX; k];
    let mut queue = std::collections::VecDeque::new();
    for v in 0..k {
        if edge(start, v) {
            if v == start {
                return Some(vec![start as u8]);
            }
            if parent[v] == usize::MAX {
                parent[v] = start;
                queue.push_back(v);
            }
        }
    }
    while let Some(u) = queue.pop_front() {
        for v in 0..k {
            if !edge(u, v) {
                continue;
            }
            if v == start {
                let mut cycle = vec![u];
                let mut x = u;
                while parent[x] != start {
                    x = parent[x];
                    cycle.push(x);
                }
                cycle.push(start);
                cycle.reverse();
                return Some(cycle.into_iter().map(|x| x as u8).collect());
            }
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}
