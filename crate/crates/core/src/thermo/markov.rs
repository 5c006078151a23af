use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbolic::{Potential, ShiftSpace};

const ROW_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

/// A first-order Markov measure compatible with a shift: a stochastic matrix
/// supported on allowed transitions plus a stationary vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkovMeasure {
    #[serde(skip)]
    space: ShiftSpace,
    matrix: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

impl MarkovMeasure {
    /// Solves for the stationary vector. Fails when it is not unique.
    pub fn new(space: &ShiftSpace, matrix: Vec<Vec<f64>>) -> Result<Self> {
        check_stochastic(space, &matrix)?;
        let k = space.alphabet_size();
        // (P^T - I) π = 0 with the last equation replaced by Σ π = 1
        let mut a = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                a[(i, j)] = matrix[j][i] - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..k {
            a[(k - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(k);
        b[k - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::InvalidArgument("stationary vector is not unique".into()))?;
        let mut stationary: Vec<f64> = pi.iter().map(|&x| if x.abs() < 1e-15 { 0.0 } else { x }).collect();
        if stationary.iter().any(|&x| x < -STATIONARY_TOL) {
            return Err(Error::InvalidArgument("stationary vector is not unique".into()));
        }
        stationary.iter_mut().for_each(|x| *x = x.max(0.0));
        let total: f64 = stationary.iter().sum();
        stationary.iter_mut().for_each(|x| *x /= total);
        MarkovMeasure::with_stationary(space, matrix, stationary)
    }

    /// Wraps a matrix and a known stationary vector after validating both.
    pub fn with_stationary(space: &ShiftSpace, matrix: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        check_stochastic(space, &matrix)?;
        let k = space.alphabet_size();
        if stationary.len() != k {
            return Err(Error::InvalidArgument("stationary vector has the wrong length".into()));
        }
        if stationary.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidArgument("stationary vector has negative entries".into()));
        }
        if (stationary.iter().sum::<f64>() - 1.0).abs() > STATIONARY_TOL {
            return Err(Error::InvalidArgument("stationary vector does not sum to 1".into()));
        }
        for j in 0..k {
            let pj: f64 = (0..k).map(|i| stationary[i] * matrix[i][j]).sum();
            if (pj - stationary[j]).abs() > STATIONARY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "πP differs from π at {j} by {:.3e}",
                    (pj - stationary[j]).abs()
                )));
            }
        }
        Ok(MarkovMeasure {
            space: space.clone(),
            matrix,
            stationary,
        })
    }

    /// Bernoulli measure with symbol probabilities `probs` on a full shift.
    pub fn bernoulli(space: &ShiftSpace, probs: &[f64]) -> Result<Self> {
        let matrix = vec![probs.to_vec(); space.alphabet_size()];
        MarkovMeasure::with_stationary(space, matrix, probs.to_vec())
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Order of the chain; always 1 for now.
    pub fn order(&self) -> usize {
        1
    }

    /// Metric entropy `-Σ π_i Σ_j P_ij ln P_ij`, in nats.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            for &p in row {
                if p > 0.0 {
                    h -= self.stationary[i] * p * p.ln();
                }
            }
        }
        h
    }

    /// `∫ pot dν`, summing over admissible two-blocks.
    pub fn integral(&self, pot: &Potential) -> Result<f64> {
        if pot.memory() > self.order() + 1 {
            return Err(Error::Unsupported(format!(
                "potential memory {} exceeds Markov order + 1",
                pot.memory()
            )));
        }
        if pot.space() != &self.space {
            return Err(Error::InvalidPotential("potential lives on a different shift".into()));
        }
        let k = self.space.alphabet_size();
        let mut total = 0.0;
        for i in 0..k {
            if self.stationary[i] == 0.0 {
                continue;
            }
            for &j in self.space.successors(i as u8) {
                let p = self.matrix[i][j as usize];
                if p == 0.0 {
                    continue;
                }
                let v = match pot.memory() {
                    1 => pot.value(&[i as u8]),
                    _ => pot.value(&[i as u8, j]),
                };
                total += self.stationary[i] * p * v;
            }
        }
        Ok(total)
    }

    /// Probability of the cylinder `[w]`.
    pub fn cylinder(&self, w: &[u8]) -> f64 {
        let Some((&first, rest)) = w.split_first() else {
            return 1.0;
        };
        let mut p = self.stationary[first as usize];
        let mut prev = first;
        for &s in rest {
            p *= self.matrix[prev as usize][s as usize];
            prev = s;
        }
        p
    }
}

fn check_stochastic(space: &ShiftSpace, matrix: &[Vec<f64>]) -> Result<()> {
    let k = space.alphabet_size();
    if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidArgument(format!("matrix must be {k}x{k}")));
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i},{j}) = {p} is not a probability"
                )));
            }
            if p > 0.0 && !space.allows(i as u8, j as u8) {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i},{j}) is on a forbidden transition"
                )));
            }
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_TOL {
            return Err(Error::InvalidArgument(format!("row {i} sums to {s}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        let full = ShiftSpace::full(2).unwrap();
        let half = MarkovMeasure::bernoulli(&full, &[0.5, 0.5]).unwrap();
        assert!((half.entropy() - 2f64.ln()).abs() < 1e-15);
        let b3 = MarkovMeasure::bernoulli(&full, &[0.7, 0.3]).unwrap();
        let expected = -(0.3f64 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
        assert!((b3.entropy() - expected).abs() < 1e-15);
        assert!((b3.entropy() - 0.610864).abs() < 1e-6);
        let cycle = MarkovMeasure::new(&full, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(cycle.entropy(), 0.0);
        assert_eq!(cycle.stationary(), &[0.5, 0.5]);
    }

    #[test]
    fn integral_examples() {
        let full = ShiftSpace::full(2).unwrap();
        let b = MarkovMeasure::bernoulli(&full, &[0.6, 0.4]).unwrap();
        assert!((b.integral(&Potential::indicator(&full, 1)).unwrap() - 0.4).abs() < 1e-15);
        assert!((b.integral(&Potential::constant(&full, 2.5)).unwrap() - 2.5).abs() < 1e-15);

        let gm = ShiftSpace::golden_mean();
        let m = MarkovMeasure::new(&gm, vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        assert!((m.stationary()[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((m.integral(&Potential::indicator(&gm, 1)).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_matrices() {
        let gm = ShiftSpace::golden_mean();
        assert!(MarkovMeasure::new(&gm, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(MarkovMeasure::new(&gm, vec![vec![0.5, 0.4], vec![1.0, 0.0]]).is_err());
        let full = ShiftSpace::full(2).unwrap();
        // two closed classes: stationary vector not unique
        assert!(MarkovMeasure::new(&full, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(MarkovMeasure::with_stationary(&full, vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.9, 0.1]).is_err());
    }

    #[test]
    fn memory_three_is_rejected() {
        let full = ShiftSpace::full(2).unwrap();
        let b = MarkovMeasure::bernoulli(&full, &[0.5, 0.5]).unwrap();
        let pot = Potential::from_fn(&full, 3, |_| 1.0).unwrap();
        assert!(b.integral(&pot).is_err());
    }
}
