//! Direct search for `sup{h_ν + ∫ψ dν : ∫φ dν = α}` over first-order
//! Markov measures.
//!
//! A grid over the row simplices supplies candidates near the constraint.
//! The best few are moved onto the constraint surface by a one-parameter
//! tilt and then improved by a compass search in logit coordinates, with
//! every trial point repaired back onto the surface.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Potential, ShiftSpace};
use crate::thermo::{edge_weights, rotation_interval, MarkovMeasure};

pub const DEFAULT_GRID_RESOLUTION: usize = 32;

// grid points examined before refusing
const MAX_GRID_POINTS: usize = 2_000_000;
const SEEDS: usize = 8;
const REPAIR_TOL: f64 = 1e-13;
const FINAL_STEP: f64 = 1e-7;
// probabilities are kept above this so logits stay finite
const FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationalResult {
    pub value: f64,
    pub entropy: f64,
    pub psi_integral: f64,
    /// `|∫φ dν − α|` at the returned measure.
    pub constraint_error: f64,
    pub measure: MarkovMeasure,
    pub grid_points: usize,
    pub feasible_grid_points: usize,
}

struct Problem<'a> {
    space: &'a ShiftSpace,
    phi: &'a Potential,
    psi: &'a Potential,
    alpha: f64,
    // tilt direction per edge
    tilt: Vec<f64>,
}

impl Problem<'_> {
    fn evaluate(&self, matrix: &[Vec<f64>]) -> Option<(f64, f64, MarkovMeasure)> {
        let m = MarkovMeasure::new(self.space, matrix.to_vec()).ok()?;
        let c = m.integral(self.phi).ok()? - self.alpha;
        let obj = m.entropy() + m.integral(self.psi).ok()?;
        Some((obj, c, m))
    }

    fn tilted(&self, logits: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
        let k = self.space.alphabet_size();
        (0..k)
            .map(|i| {
                let succ = self.space.successors(i as u8);
                let mut row = vec![0.0; k];
                let mx = succ
                    .iter()
                    .map(|&j| logits[i][j as usize] + t * self.tilt[i * k + j as usize])
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for &j in succ {
                    let v = (logits[i][j as usize] + t * self.tilt[i * k + j as usize] - mx).exp();
                    row[j as usize] = v;
                    total += v;
                }
                row.iter_mut().for_each(|x| *x /= total);
                row
            })
            .collect()
    }

    /// Moves `logits` along the tilt until the constraint holds.
    fn repair(&self, logits: &[Vec<f64>]) -> Option<(f64, Vec<Vec<f64>>, MarkovMeasure)> {
        let constraint = |t: f64| self.evaluate(&self.tilted(logits, t)).map(|e| e.1);
        let c0 = constraint(0.0)?;
        let (mut lo, mut hi) = if c0.abs() <= REPAIR_TOL {
            (0.0, 0.0)
        } else {
            let mut bracket = None;
            let mut step = 0.25;
            while step <= 64.0 {
                for t in [step, -step] {
                    if let Some(c) = constraint(t) {
                        if c.signum() != c0.signum() {
                            bracket = Some(if t > 0.0 { (0.0, t) } else { (t, 0.0) });
                            break;
                        }
                    }
                }
                if bracket.is_some() {
                    break;
                }
                step *= 2.0;
            }
            bracket?
        };
        let c_lo = constraint(lo)?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let c = constraint(mid)?;
            if c.abs() <= REPAIR_TOL {
                lo = mid;
                hi = mid;
                break;
            }
            if c.signum() == c_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let matrix = self.tilted(logits, t);
        let (obj, _, m) = self.evaluate(&matrix)?;
        let k = self.space.alphabet_size();
        let new_logits = (0..k)
            .map(|i| matrix[i].iter().map(|&p| p.max(FLOOR).ln()).collect())
            .collect();
        Some((obj, new_logits, m))
    }
}

/// Compositions of `r` into `parts` nonnegative pieces, in lexicographic order.
fn compositions(r: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![r]];
    }
    let mut out = Vec::new();
    for first in 0..=r {
        for mut rest in compositions(r - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Best value of `h_ν + ∫ψ dν` over Markov measures `ν` with `∫φ dν = α`.
pub fn constrained_variational(
    space: &ShiftSpace,
    phi: &Potential,
    psi: &Potential,
    alpha: f64,
    grid_resolution: usize,
) -> Result<VariationalResult> {
    if grid_resolution == 0 {
        return Err(Error::InvalidArgument("grid_resolution must be positive".into()));
    }
    let k = space.alphabet_size();
    let phi_w = edge_weights(phi)?;
    edge_weights(psi)?;
    let interval = rotation_interval(space, phi)?;
    let tol = 1e-12 * (1.0 + interval.min.abs().max(interval.max.abs()));
    if !interval.contains(alpha, tol) {
        return Err(Error::Infeasible {
            alpha,
            min: interval.min,
            max: interval.max,
        });
    }

    // the tilt moves mass toward edges, and targets, with large φ
    let mut tilt = vec![0.0; k * k];
    for i in 0..k {
        for &j in space.successors(i as u8) {
            let j = j as usize;
            let succ = space.successors(j as u8);
            let ahead = succ.iter().map(|&l| phi_w[j * k + l as usize]).sum::<f64>() / succ.len() as f64;
            tilt[i * k + j] = phi_w[i * k + j] + ahead;
        }
    }
    let problem = Problem {
        space,
        phi,
        psi,
        alpha,
        tilt,
    };

    let at_end = (alpha - interval.max).abs() <= tol || (alpha - interval.min).abs() <= tol;
    if at_end || interval.is_degenerate(tol) {
        if let Some(r) = endpoint_measure(&problem, &interval, alpha, tol) {
            return Ok(r);
        }
    }

    let rows: Vec<Vec<Vec<usize>>> = (0..k)
        .map(|i| compositions(grid_resolution, space.successors(i as u8).len()))
        .collect();
    let total: f64 = rows.iter().map(|r| r.len() as f64).product();
    if total > MAX_GRID_POINTS as f64 {
        return Err(Error::InvalidArgument(format!(
            "grid of {total:.3e} points is too large; lower grid_resolution"
        )));
    }
    let slack = (phi.max() - phi.min()) * 2.0 / grid_resolution as f64 + tol;
    let mut seeds: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    let mut feasible = 0usize;
    let mut index = vec![0usize; k];
    let mut visited = 0usize;
    loop {
        visited += 1;
        let matrix: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let mut row = vec![0.0; k];
                for (&j, &c) in space.successors(i as u8).iter().zip(&rows[i][index[i]]) {
                    row[j as usize] = c as f64 / grid_resolution as f64;
                }
                row
            })
            .collect();
        if let Some((obj, c, _)) = problem.evaluate(&matrix) {
            if c.abs() <= slack {
                feasible += 1;
                seeds.push((obj, matrix));
                seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
                seeds.truncate(SEEDS);
            }
        }
        // odometer over row choices
        let mut i = 0;
        while i < k {
            index[i] += 1;
            if index[i] < rows[i].len() {
                break;
            }
            index[i] = 0;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    if feasible == 0 {
        return Err(Error::EmptyFeasibleGrid(grid_resolution));
    }

    let mut best: Option<(f64, MarkovMeasure)> = None;
    for (_, matrix) in seeds {
        let logits: Vec<Vec<f64>> = matrix
            .iter()
            .map(|row| row.iter().map(|&p| p.max(FLOOR).ln()).collect())
            .collect();
        let Some(start) = problem.repair(&logits) else {
            continue;
        };
        let (obj, m) = compass(&problem, start);
        if best.as_ref().is_none_or(|b| obj > b.0) {
            best = Some((obj, m));
        }
    }
    let (value, measure) = best.ok_or(Error::EmptyFeasibleGrid(grid_resolution))?;
    Ok(VariationalResult {
        value,
        entropy: measure.entropy(),
        psi_integral: measure.integral(psi)?,
        constraint_error: (measure.integral(phi)? - alpha).abs(),
        measure,
        grid_points: visited,
        feasible_grid_points: feasible,
    })
}

/// Compass search in logit coordinates; each trial is repaired onto the
/// constraint before it is compared.
fn compass(problem: &Problem, start: (f64, Vec<Vec<f64>>, MarkovMeasure)) -> (f64, MarkovMeasure) {
    let (mut obj, mut logits, mut measure) = start;
    let k = problem.space.alphabet_size();
    let coords: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| problem.space.successors(i as u8).iter().map(move |&j| (i, j as usize)))
        .filter(|&(i, _)| problem.space.successors(i as u8).len() > 1)
        .collect();
    let mut step = 0.5;
    while step >= FINAL_STEP {
        let mut improved = false;
        for &(i, j) in &coords {
            for dir in [step, -step] {
                let mut trial = logits.clone();
                trial[i][j] += dir;
                if let Some((o, l, m)) = problem.repair(&trial) {
                    if o > obj + 1e-15 {
                        obj = o;
                        logits = l;
                        measure = m;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (obj, measure)
}

/// At an end of the rotation interval the optimum sits on the witness cycle.
fn endpoint_measure(
    problem: &Problem,
    interval: &crate::thermo::RotationInterval,
    alpha: f64,
    tol: f64,
) -> Option<VariationalResult> {
    let cycle = if (alpha - interval.max).abs() <= tol {
        &interval.max_cycle
    } else {
        &interval.min_cycle
    };
    let space = problem.space;
    let k = space.alphabet_size();
    let c = cycle.symbols();
    let mut matrix: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let succ = space.successors(i as u8);
            let mut row = vec![0.0; k];
            for &j in succ {
                row[j as usize] = 1.0 / succ.len() as f64;
            }
            row
        })
        .collect();
    for (idx, &s) in c.iter().enumerate() {
        let next = c[(idx + 1) % c.len()] as usize;
        matrix[s as usize] = vec![0.0; k];
        matrix[s as usize][next] = 1.0;
    }
    let mut stationary = vec![0.0; k];
    for &s in c {
        stationary[s as usize] = 1.0 / c.len() as f64;
    }
    let measure = MarkovMeasure::with_stationary(space, matrix, stationary).ok()?;
    let psi_integral = measure.integral(problem.psi).ok()?;
    let constraint_error = (measure.integral(problem.phi).ok()? - alpha).abs();
    Some(VariationalResult {
        value: psi_integral,
        entropy: 0.0,
        psi_integral,
        constraint_error,
        measure,
        grid_points: 0,
        feasible_grid_points: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_one_third() {
        let gm = ShiftSpace::golden_mean();
        let phi = Potential::indicator(&gm, 1);
        let zero = Potential::constant(&gm, 0.0);
        let r = constrained_variational(&gm, &phi, &zero, 1.0 / 3.0, DEFAULT_GRID_RESOLUTION).unwrap();
        assert!((r.value - 2.0 / 3.0 * 2f64.ln()).abs() < 1e-6, "{}", r.value);
        assert!(r.constraint_error < 1e-10);
        assert!((r.measure.matrix()[0][1] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn full_shift_half() {
        let full = ShiftSpace::full(2).unwrap();
        let phi = Potential::indicator(&full, 1);
        let zero = Potential::constant(&full, 0.0);
        let r = constrained_variational(&full, &phi, &zero, 0.5, 16).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn endpoint_uses_the_cycle() {
        let gm = ShiftSpace::golden_mean();
        let phi = Potential::indicator(&gm, 1);
        let psi = Potential::from_fn(&gm, 2, |w| if w == [1, 0] { 0.8 } else { 0.1 }).unwrap();
        let r = constrained_variational(&gm, &phi, &psi, 0.5, 8).unwrap();
        assert_eq!(r.entropy, 0.0);
        assert!((r.value - 0.45).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_empty() {
        let gm = ShiftSpace::golden_mean();
        let phi = Potential::indicator(&gm, 1);
        let zero = Potential::constant(&gm, 0.0);
        assert!(matches!(
            constrained_variational(&gm, &phi, &zero, 0.7, 8),
            Err(Error::Infeasible { .. })
        ));
        assert!(compositions(3, 2).len() == 4);
    }
}
