//! Transfer-operator pressure for potentials of memory at most two.
//!
//! The Ruelle matrix has entries `A_ij · exp(w_ij)` where `w_ij` is the
//! potential on the edge `i -> j` (for memory one, `w_ij = pot(i)`). Its
//! spectral radius is computed by power iteration on a rescaled copy and
//! certified by Collatz–Wielandt bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Potential, ShiftSpace};
use crate::thermo::MarkovMeasure;

pub const DEFAULT_POWER_TOL: f64 = 1e-12;
pub const MAX_POWER_ITERATIONS: usize = 100_000;

/// Edge weights `w_ij` of a memory-1 or memory-2 potential; `-inf` on
/// forbidden transitions.
pub fn edge_weights(pot: &Potential) -> Result<Vec<f64>> {
    let space = pot.space();
    let k = space.alphabet_size();
    let mut w = vec![f64::NEG_INFINITY; k * k];
    for i in 0..k as u8 {
        for &j in space.successors(i) {
            w[i as usize * k + j as usize] = match pot.memory() {
                1 => pot.value(&[i]),
                2 => pot.value(&[i, j]),
                m => {
                    return Err(Error::Unsupported(format!(
                        "transfer operator needs memory <= 2, got {m}; recode onto the edge shift first"
                    )))
                }
            };
        }
    }
    Ok(w)
}

/// Perron data of a Ruelle matrix given by log-weights.
#[derive(Clone, Debug, Serialize)]
pub struct PerronSolution {
    /// `log ρ`, the pressure.
    pub log_radius: f64,
    /// Collatz–Wielandt bracket on `log ρ`.
    pub log_lower: f64,
    pub log_upper: f64,
    /// Symbols of the communicating class carrying the spectral radius.
    pub class: Vec<usize>,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub iterations: usize,
    #[serde(skip)]
    scaled: Vec<f64>,
    #[serde(skip)]
    size: usize,
}

impl PerronSolution {
    /// Probability of the edge `i -> j` under the equilibrium state,
    /// proportional to `l_i B_ij r_j`.
    fn edge_mass(&self) -> Vec<f64> {
        let k = self.size;
        let mut mass = vec![0.0; k * k];
        for &i in &self.class {
            for &j in &self.class {
                mass[i * k + j] = self.left[i] * self.scaled[i * k + j] * self.right[j];
            }
        }
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|m| *m /= total);
        mass
    }

    /// `∫ f dμ` for the equilibrium state `μ`, with `f` given as edge weights.
    pub fn edge_integral(&self, f: &[f64]) -> f64 {
        let mass = self.edge_mass();
        mass.iter().zip(f).filter(|(m, _)| **m > 0.0).map(|(m, v)| m * v).sum()
    }

    /// The equilibrium state as a first-order Markov measure. Symbols outside
    /// the dominant class get stationary mass zero and uniform rows.
    pub fn equilibrium(&self, space: &ShiftSpace) -> Result<MarkovMeasure> {
        let k = self.size;
        let mass = self.edge_mass();
        let mut matrix = vec![vec![0.0; k]; k];
        let mut stationary = vec![0.0; k];
        for i in 0..k {
            let row: f64 = mass[i * k..(i + 1) * k].iter().sum();
            stationary[i] = row;
            if row > 0.0 {
                for j in 0..k {
                    matrix[i][j] = mass[i * k + j] / row;
                }
            } else {
                let succ = space.successors(i as u8);
                for &j in succ {
                    matrix[i][j as usize] = 1.0 / succ.len() as f64;
                }
            }
        }
        MarkovMeasure::with_stationary(space, matrix, stationary)
    }
}

/// `log` of the spectral radius of `A_ij exp(pot_ij)`.
pub fn transfer_pressure(space: &ShiftSpace, pot: &Potential) -> Result<f64> {
    Ok(perron(space.alphabet_size(), &edge_weights(pot)?, DEFAULT_POWER_TOL)?.log_radius)
}

/// Spectral data of the matrix with entries `exp(log_weights[i*k + j])`.
///
/// Reducible matrices are split into communicating classes and the largest
/// class radius wins. Each class is rescaled so its largest entry is one;
/// periodic classes are iterated through `I + B`, which is primitive and has
/// radius `1 + ρ(B)`.
pub fn perron(size: usize, log_weights: &[f64], tol: f64) -> Result<PerronSolution> {
    let k = size;
    let shift = log_weights
        .iter()
        .copied()
        .filter(|w| w.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::InvalidArgument("matrix has no allowed transitions".into()));
    }
    let scaled: Vec<f64> = log_weights
        .iter()
        .map(|&w| {
            // entries below e^-600 are dropped so eigenvectors stay in the normal range
            if w.is_finite() && w - shift > -600.0 {
                (w - shift).exp()
            } else {
                0.0
            }
        })
        .collect();

    let mut best: Option<PerronSolution> = None;
    for class in communicating_classes(k, &scaled) {
        let sub = restrict(k, &scaled, &class);
        let sub_max = sub.iter().copied().fold(0.0, f64::max);
        if sub_max == 0.0 {
            continue;
        }
        let m = class.len();
        let normalized: Vec<f64> = sub.iter().map(|x| x / sub_max).collect();
        let periodic = period(m, &normalized) > 1;
        let (rho, lo, hi, right, it_r) = power_iterate(m, &normalized, periodic, false, tol)?;
        let (_, _, _, left, it_l) = power_iterate(m, &normalized, periodic, true, tol)?;
        let log_radius = rho.ln() + sub_max.ln() + shift;
        let better = best.as_ref().is_none_or(|b| log_radius > b.log_radius);
        if better {
            let mut r = vec![0.0; k];
            let mut l = vec![0.0; k];
            for (a, &i) in class.iter().enumerate() {
                r[i] = right[a];
                l[i] = left[a];
            }
            let dot: f64 = (0..k).map(|i| l[i] * r[i]).sum();
            l.iter_mut().for_each(|x| *x /= dot);
            best = Some(PerronSolution {
                log_radius,
                log_lower: lo.ln() + sub_max.ln() + shift,
                log_upper: hi.ln() + sub_max.ln() + shift,
                class,
                right: r,
                left: l,
                iterations: it_r + it_l,
                scaled: scaled.clone(),
                size: k,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("matrix has no cycle".into()))
}

/// Returns `(ρ, lower, upper, eigenvector, iterations)` for an irreducible
/// nonnegative matrix with largest entry one.
fn power_iterate(
    m: usize,
    b: &[f64],
    periodic: bool,
    transpose: bool,
    tol: f64,
) -> Result<(f64, f64, f64, Vec<f64>, usize)> {
    let entry = |i: usize, j: usize| {
        if transpose {
            b[j * m + i]
        } else {
            b[i * m + j]
        }
    };
    let shift = if periodic { 1.0 } else { 0.0 };
    let mut x = vec![1.0; m];
    let mut y = vec![0.0; m];
    for it in 1..=MAX_POWER_ITERATIONS {
        for i in 0..m {
            y[i] = shift * x[i] + (0..m).map(|j| entry(i, j) * x[j]).sum::<f64>();
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..m {
            let ratio = y[i] / x[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let norm = y.iter().copied().fold(0.0, f64::max);
        for i in 0..m {
            x[i] = y[i] / norm;
        }
        let (lo_b, hi_b) = (lo - shift, hi - shift);
        if hi_b - lo_b <= tol * hi_b.abs() || hi - lo <= f64::EPSILON * hi {
            let rho = 0.5 * (lo_b + hi_b);
            return Ok((rho, lo_b.max(f64::MIN_POSITIVE), hi_b, x, it));
        }
    }
    Err(Error::NoConvergence(MAX_POWER_ITERATIONS))
}

/// Strongly connected components of the support graph, ordered by smallest member.
fn communicating_classes(k: usize, b: &[f64]) -> Vec<Vec<usize>> {
    let mut reach = vec![false; k * k];
    for i in 0..k {
        reach[i * k + i] = true;
        for j in 0..k {
            if b[i * k + j] > 0.0 {
                reach[i * k + j] = true;
            }
        }
    }
    for mid in 0..k {
        for i in 0..k {
            if reach[i * k + mid] {
                for j in 0..k {
                    if reach[mid * k + j] {
                        reach[i * k + j] = true;
                    }
                }
            }
        }
    }
    let mut assigned = vec![false; k];
    let mut classes = Vec::new();
    for i in 0..k {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = (0..k).filter(|&j| reach[i * k + j] && reach[j * k + i]).collect();
        for &j in &class {
            assigned[j] = true;
        }
        classes.push(class);
    }
    classes
}

fn restrict(k: usize, b: &[f64], class: &[usize]) -> Vec<f64> {
    let m = class.len();
    let mut sub = vec![0.0; m * m];
    for (a, &i) in class.iter().enumerate() {
        for (c, &j) in class.iter().enumerate() {
            sub[a * m + c] = b[i * k + j];
        }
    }
    sub
}

/// Period of an irreducible support graph: gcd of `level(i) + 1 - level(j)`
/// over edges, with BFS levels from vertex 0.
fn period(m: usize, b: &[f64]) -> usize {
    let mut level = vec![usize::MAX; m];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for j in 0..m {
            if b[i * m + j] > 0.0 && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut g = 0usize;
    for i in 0..m {
        for j in 0..m {
            if b[i * m + j] > 0.0 {
                let d = (level[i] + 1).abs_diff(level[j]);
                g = gcd(g, d);
            }
        }
    }
    g.max(1)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let full = ShiftSpace::full(2).unwrap();
        let zero = Potential::constant(&full, 0.0);
        assert!((transfer_pressure(&full, &zero).unwrap() - 2f64.ln()).abs() < 1e-12);

        let gm = ShiftSpace::golden_mean();
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        let p = transfer_pressure(&gm, &Potential::constant(&gm, 0.0)).unwrap();
        assert!((p - golden).abs() < 1e-12);

        for &q in &[-3.0, 0.0, 0.7, 5.0] {
            let pot = Potential::indicator(&full, 1).scaled(q);
            let p = transfer_pressure(&full, &pot).unwrap();
            assert!((p - (1.0 + q.exp()).ln()).abs() < 1e-11, "q = {q}");
        }
    }

    #[test]
    fn bracket_contains_value() {
        let gm = ShiftSpace::golden_mean();
        let pot = Potential::from_fn(&gm, 2, |w| 0.3 * w[0] as f64 - 0.2 * w[1] as f64).unwrap();
        let sol = perron(2, &edge_weights(&pot).unwrap(), 1e-12).unwrap();
        assert!(sol.log_lower <= sol.log_radius && sol.log_radius <= sol.log_upper);
        assert!(sol.log_upper - sol.log_lower < 1e-11);
    }

    #[test]
    fn periodic_matrix_uses_shifted_iteration() {
        // permutation matrix: ρ = 1, period 2
        let w = [f64::NEG_INFINITY, 0.0, 0.0, f64::NEG_INFINITY];
        let sol = perron(2, &w, 1e-12).unwrap();
        assert!(sol.log_radius.abs() < 1e-12);
    }

    #[test]
    fn reducible_takes_largest_class() {
        // 0 -> 0 weight e^1, 0 -> 1, 1 -> 1 weight e^2: classes {0}, {1}
        let w = [1.0, 0.0, f64::NEG_INFINITY, 2.0];
        let sol = perron(2, &w, 1e-12).unwrap();
        assert!((sol.log_radius - 2.0).abs() < 1e-12);
        assert_eq!(sol.class, vec![1]);
    }

    #[test]
    fn huge_weights_do_not_overflow() {
        let full = ShiftSpace::full(2).unwrap();
        let pot = Potential::indicator(&full, 1).scaled(5000.0);
        let p = transfer_pressure(&full, &pot).unwrap();
        assert!((p - 5000.0).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_of_zero_potential_is_parry() {
        let gm = ShiftSpace::golden_mean();
        let sol = perron(2, &edge_weights(&Potential::constant(&gm, 0.0)).unwrap(), 1e-12).unwrap();
        let mu = sol.equilibrium(&gm).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        // Parry measure entropy equals topological entropy
        assert!((mu.entropy() - golden.ln()).abs() < 1e-10);
    }
}
