use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::symbolic::{ShiftSpace, Word};

/// `d(x, y) = θ^j` where `j` is the length of the longest common prefix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftMetric {
    theta: f64,
}

impl Default for ShiftMetric {
    fn default() -> Self {
        ShiftMetric { theta: 0.5 }
    }
}

// relative slack when comparing eps against powers of θ
const POW_TOL: f64 = 1e-12;

impl ShiftMetric {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidArgument(format!("theta must lie in (0,1), got {theta}")));
        }
        Ok(ShiftMetric { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Distance between two points given by prefixes. Prefixes that agree up
    /// to the shorter length are reported at distance `θ^len`.
    pub fn distance(&self, x: &[u8], y: &[u8]) -> f64 {
        let common = x.iter().zip(y).take_while(|(a, b)| a == b).count();
        self.theta.powi(common as i32)
    }

    /// Smallest `j` with `θ^j < eps`: `d(x,y) < eps` iff `x`, `y` share `j` symbols.
    pub fn open_ball_depth(&self, eps: f64) -> usize {
        let mut j = 0;
        let mut p = 1.0;
        while p >= eps * (1.0 - POW_TOL) {
            p *= self.theta;
            j += 1;
        }
        j
    }

    /// Smallest `j` with `θ^j <= eps`: `d(x,y) <= eps` iff `x`, `y` share `j` symbols.
    pub fn closed_ball_depth(&self, eps: f64) -> usize {
        let mut j = 0;
        let mut p = 1.0;
        while p > eps * (1.0 + POW_TOL) {
            p *= self.theta;
            j += 1;
        }
        j
    }

    /// Cylinder depth of the Bowen ball `B_n(x, eps)`: points whose first `n`
    /// iterates stay within `eps` agree with `x` on this many symbols.
    pub fn bowen_depth(&self, n: usize, eps: f64) -> usize {
        n - 1 + self.open_ball_depth(eps)
    }

    /// `max_{i<n} d(T^i x, T^i y)` for points given by long enough prefixes.
    pub fn bowen_distance(&self, x: &[u8], y: &[u8], n: usize) -> f64 {
        (0..n)
            .map(|i| self.distance(&x[i.min(x.len())..], &y[i.min(y.len())..]))
            .fold(0.0, f64::max)
    }
}

impl ShiftSpace {
    /// A maximal `(n, eps)`-separated set among the periodic points coded by
    /// admissible `n`-words, chosen greedily in lexicographic order.
    ///
    /// Two such points lie within Bowen distance `eps` exactly when their
    /// periodic extensions share the first `bowen_depth(n, eps)` symbols, so
    /// the greedy pass keeps one word per distinct extended prefix.
    pub fn separated_set(&self, metric: &ShiftMetric, n: usize, eps: f64) -> Result<Vec<Word>> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("eps must lie in (0,1], got {eps}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let depth = metric.bowen_depth(n, eps);
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut out = Vec::new();
        for w in self.words(n) {
            let key: Vec<u8> = (0..depth).map(|i| w.periodic(i)).collect();
            if seen.insert(key) {
                out.push(w);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bowen_depth_matches_cylinders() {
        let m = ShiftMetric::default();
        // d_n < θ^j  iff  first n + j symbols agree
        for n in 1..6 {
            for j in 0..5 {
                assert_eq!(m.bowen_depth(n, 0.5f64.powi(j as i32)), n + j);
            }
        }
        assert_eq!(m.bowen_depth(3, 0.7), 3);
    }

    #[test]
    fn separated_examples() {
        let m = ShiftMetric::default();
        let full = ShiftSpace::full(2).unwrap();
        assert_eq!(full.separated_set(&m, 2, 1.0).unwrap().len(), 4);
        assert_eq!(full.separated_set(&m, 2, 0.25).unwrap().len(), 4);
        let gm = ShiftSpace::golden_mean();
        assert_eq!(gm.separated_set(&m, 3, 1.0).unwrap().len(), 5);
    }

    #[test]
    fn separated_set_is_pairwise_separated_brute_force() {
        let m = ShiftMetric::default();
        let gm = ShiftSpace::golden_mean();
        for &eps in &[1.0, 0.5, 0.3, 0.125] {
            let set = gm.separated_set(&m, 4, eps).unwrap();
            let ext = |w: &Word| (0..40).map(|i| w.periodic(i)).collect::<Vec<u8>>();
            for (i, a) in set.iter().enumerate() {
                for b in &set[i + 1..] {
                    assert!(m.bowen_distance(&ext(a), &ext(b), 4) >= eps);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_eps() {
        let m = ShiftMetric::default();
        let full = ShiftSpace::full(2).unwrap();
        assert!(full.separated_set(&m, 2, 0.0).is_err());
        assert!(full.separated_set(&m, 2, 1.5).is_err());
    }
}
