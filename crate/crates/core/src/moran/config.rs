use serde::Serialize;

use crate::error::{Error, Result};
use crate::thermo::DEFAULT_MAX_N;

/// Default number of leaves a scheme may materialize.
pub const DEFAULT_LEAF_BUDGET: usize = 1_000_000;

/// One ergodic piece of the target measure: words of length
/// `⌊weight · n_k⌋` whose averages sit near `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Component {
    pub alpha: f64,
    pub weight: f64,
}

/// Parameters of a Moran construction. Per-level vectors are indexed by
/// `k - 1` and all have length `k_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoranConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// Strictly decreasing tolerances `δ_k`.
    pub deltas: Vec<f64>,
    /// Strictly increasing lower bounds `l_k` on the word lengths.
    pub min_lengths: Vec<usize>,
    /// Word lengths `n_k` of the separated families.
    pub word_lengths: Vec<usize>,
    /// Copy counts `N_k`.
    pub copies: Vec<usize>,
    pub eps: f64,
    /// Empty means a single component at `alpha` with weight one.
    pub components: Vec<Component>,
    pub leaf_budget: usize,
}

impl MoranConfig {
    /// Single-component configuration with `δ_k = 1/(k+1)` and `l_k = n_k`.
    pub fn new(alpha: f64, gamma: f64, eps: f64, word_lengths: Vec<usize>, copies: Vec<usize>) -> Result<Self> {
        let k_max = word_lengths.len();
        let cfg = MoranConfig {
            alpha,
            gamma,
            deltas: (1..=k_max).map(|k| 1.0 / (k as f64 + 1.0)).collect(),
            min_lengths: word_lengths.clone(),
            word_lengths,
            copies,
            eps,
            components: Vec::new(),
            leaf_budget: DEFAULT_LEAF_BUDGET,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like `new` with explicit tolerances and `l_k = k`, for small test schemes.
    #[cfg(test)]
    pub(crate) fn for_tests(alpha: f64, word_lengths: Vec<usize>, copies: Vec<usize>, deltas: Vec<f64>) -> Self {
        let cfg = MoranConfig {
            alpha,
            gamma: 0.1,
            deltas,
            min_lengths: (1..=word_lengths.len()).collect(),
            word_lengths,
            copies,
            eps: 0.5,
            components: Vec::new(),
            leaf_budget: DEFAULT_LEAF_BUDGET,
        };
        cfg.validate().expect("valid test config");
        cfg
    }

    pub fn k_max(&self) -> usize {
        self.word_lengths.len()
    }

    /// The components, with the single-component default filled in.
    pub fn effective_components(&self) -> Vec<Component> {
        if self.components.is_empty() {
            vec![Component {
                alpha: self.alpha,
                weight: 1.0,
            }]
        } else {
            self.components.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let k = self.k_max();
        if k == 0 {
            return bad("at least one level is required".into());
        }
        if self.deltas.len() != k || self.min_lengths.len() != k || self.copies.len() != k {
            return bad(format!(
                "per-level lists must all have length {k} (deltas {}, min lengths {}, copies {})",
                self.deltas.len(),
                self.min_lengths.len(),
                self.copies.len()
            ));
        }
        if !(self.gamma > 0.0) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad(format!("eps must lie in (0, 1], got {}", self.eps));
        }
        if !self.alpha.is_finite() {
            return bad("alpha must be finite".into());
        }
        for i in 0..k {
            if !(self.deltas[i] > 0.0) {
                return bad(format!("delta_{} must be positive", i + 1));
            }
            if i > 0 && self.deltas[i] >= self.deltas[i - 1] {
                return bad("deltas must be strictly decreasing".into());
            }
            if i > 0 && self.min_lengths[i] <= self.min_lengths[i - 1] {
                return bad("min lengths must be strictly increasing".into());
            }
            if self.word_lengths[i] < self.min_lengths[i] {
                return bad(format!(
                    "n_{} = {} is below l_{} = {}",
                    i + 1,
                    self.word_lengths[i],
                    i + 1,
                    self.min_lengths[i]
                ));
            }
            if self.word_lengths[i] > DEFAULT_MAX_N {
                return bad(format!(
                    "n_{} = {} is over the enumeration limit",
                    i + 1,
                    self.word_lengths[i]
                ));
            }
            if self.copies[i] == 0 {
                return bad(format!("N_{} must be at least 1", i + 1));
            }
        }
        if !self.components.is_empty() {
            let total: f64 = self.components.iter().map(|c| c.weight).sum();
            if self.components.iter().any(|c| !(c.weight > 0.0)) || (total - 1.0).abs() > 1e-9 {
                return bad("component weights must be positive and sum to 1".into());
            }
            let mean: f64 = self.components.iter().map(|c| c.weight * c.alpha).sum();
            if (mean - self.alpha).abs() > 1e-9 {
                return bad(format!(
                    "component averages combine to {mean}, not alpha = {}",
                    self.alpha
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = MoranConfig::new(0.5, 0.1, 0.5, vec![8, 10, 12], vec![1, 2, 2]).unwrap();
        assert_eq!(c.deltas, vec![0.5, 1.0 / 3.0, 0.25]);
        assert_eq!(c.effective_components().len(), 1);
        assert!(MoranConfig::new(0.5, 0.1, 0.5, vec![8, 8], vec![1, 2]).is_err());
        assert!(MoranConfig::new(0.5, 0.1, 1.5, vec![8], vec![1]).is_err());
        assert!(MoranConfig::new(0.5, 0.1, 0.5, vec![8], vec![0]).is_err());
        let mut bad = c.clone();
        bad.deltas = vec![0.5, 0.5, 0.25];
        assert!(bad.validate().is_err());
        let mut two = c;
        two.components = vec![
            Component {
                alpha: 0.3,
                weight: 0.5,
            },
            Component {
                alpha: 0.7,
                weight: 0.5,
            },
        ];
        assert!(two.validate().is_ok());
        two.components[1].alpha = 0.8;
        assert!(two.validate().is_err());
    }
}
