//! Small numerical helpers shared across modules.

use crate::error::{Error, Result};

/// Streaming `log Σ exp(x_i)`.
///
/// Keeps a running maximum and the sum of `exp(x - max)`, rescaling only when
/// the maximum moves, so one `exp` is spent per term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.max == f64::NEG_INFINITY
    }

    /// `log Σ exp(x_i)`; `-inf` when nothing was added.
    pub fn value(&self) -> f64 {
        if self.is_empty() {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Least-squares line through `(x, y)`: returns `(slope, intercept, rms residual)`.
pub fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// The largest two thirds of a sorted sample (at least three points).
pub fn upper_two_thirds<T: Copy>(points: &[T]) -> &[T] {
    let keep = ((2 * points.len()) / 3).max(3).min(points.len());
    &points[points.len() - keep..]
}

/// Root of a nondecreasing function on `[lo, hi]` by bisection. Assumes
/// `f(lo) <= 0 <= f(hi)`.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, max_iter: usize, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Binary entropy in nats, `-(a ln a + (1-a) ln(1-a))`.
pub fn binary_entropy(a: f64) -> f64 {
    let h = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    h(a) + h(1.0 - a)
}
