//! The interval, circle and skew-product maps, evaluated in `f64`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::smooth::{Interval, IntervalSet};

/// A map of `[0, 1]` whose branches are increasing bijections from
/// consecutive subintervals onto `[0, 1]`, so that it is coded by the full
/// shift on `branch_count()` symbols.
pub trait FullBranchMap: Sync {
    fn name(&self) -> String;

    fn branch_count(&self) -> usize;

    /// Domain `[lo, hi]` of branch `b`.
    fn branch_domain(&self, b: usize) -> (f64, f64);

    /// Branch `b` evaluated at a point of its domain.
    fn branch(&self, b: usize, x: f64) -> f64;

    /// Preimage of `y ∈ [0, 1]` under branch `b`.
    fn inverse(&self, b: usize, y: f64) -> f64;

    /// `|T'(x)|`.
    fn derivative(&self, x: f64) -> f64;

    /// Bound on the absolute error of `inverse` and `branch`.
    fn accuracy(&self) -> f64;

    /// Distance on the phase space.
    fn distance(&self, x: f64, y: f64) -> f64;

    /// Closed `ε`-neighborhood of `c`, as a subset of `[0, 1]`.
    fn tube(&self, c: f64, eps: f64) -> IntervalSet;

    fn apply(&self, x: f64) -> f64 {
        let b = (0..self.branch_count())
            .find(|&b| x <= self.branch_domain(b).1)
            .unwrap_or(self.branch_count() - 1);
        self.branch(b, x)
    }

    /// `T(S)` with outward rounding.
    fn image(&self, set: &IntervalSet) -> IntervalSet {
        let pad = self.accuracy();
        let mut out = Vec::new();
        for p in set.pieces() {
            for b in 0..self.branch_count() {
                let (lo, hi) = self.branch_domain(b);
                if let Some(part) = p.intersect(&Interval { lo, hi }) {
                    let y0 = self.branch(b, part.lo).max(0.0);
                    let y1 = self.branch(b, part.hi).min(1.0);
                    out.extend(Interval::outward(y0, y1.max(y0), pad));
                }
            }
        }
        IntervalSet::from_pieces(out)
    }

    /// `T⁻¹(S)` with outward rounding.
    fn pullback(&self, set: &IntervalSet) -> IntervalSet {
        let pad = self.accuracy();
        let mut out = Vec::new();
        for b in 0..self.branch_count() {
            for p in set.pieces() {
                let y0 = p.lo.clamp(0.0, 1.0);
                let y1 = p.hi.clamp(0.0, 1.0);
                out.extend(Interval::outward(self.inverse(b, y0), self.inverse(b, y1), pad));
            }
        }
        IntervalSet::from_pieces(out)
    }
}

/// The intermittent map `x(1 + 2^α x^α)` on `[0, 1/2]`, `2x − 1` on
/// `(1/2, 1]`, with a neutral fixed point at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MPMap {
    alpha: f64,
}

// bracket width at which the left inverse stops
const INVERSE_TOL: f64 = 1e-15;

impl MPMap {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "MP exponent must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(MPMap { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn left(&self, x: f64) -> f64 {
        x * (1.0 + (2.0 * x).powf(self.alpha))
    }

    pub fn try_apply(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidArgument(format!("MP map is defined on [0, 1], got {x}")));
        }
        Ok(self.apply(x))
    }

    /// The left and right preimages of `y`.
    pub fn inverse_branches(&self, y: f64) -> Result<[f64; 2]> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidArgument(format!(
                "MP preimages need y in [0, 1], got {y}"
            )));
        }
        Ok([self.left_inverse(y), 0.5 * (y + 1.0)])
    }

    /// Root of `x(1 + (2x)^α) = y` in `[0, 1/2]`. Newton steps are taken
    /// when they stay inside the current bracket, bisection otherwise.
    fn left_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 0.5;
        }
        // x ≤ left(x) ≤ 2x on [0, 1/2]
        let (mut lo, mut hi) = (0.5 * y, y.min(0.5));
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.left(x) - y;
            if g == 0.0 {
                return x;
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= INVERSE_TOL {
                break;
            }
            let slope = 1.0 + (1.0 + self.alpha) * (2.0 * x).powf(self.alpha);
            let step = g / slope;
            let next = x - step;
            if step.abs() <= 0.25 * f64::EPSILON * x {
                return next.clamp(lo, hi);
            }
            x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        0.5 * (lo + hi)
    }
}

impl FullBranchMap for MPMap {
    fn name(&self) -> String {
        format!("mp(alpha={})", self.alpha)
    }

    fn branch_count(&self) -> usize {
        2
    }

    fn branch_domain(&self, b: usize) -> (f64, f64) {
        if b == 0 {
            (0.0, 0.5)
        } else {
            (0.5, 1.0)
        }
    }

    fn branch(&self, b: usize, x: f64) -> f64 {
        if b == 0 {
            self.left(x)
        } else {
            2.0 * x - 1.0
        }
    }

    fn inverse(&self, b: usize, y: f64) -> f64 {
        if b == 0 {
            self.left_inverse(y)
        } else {
            0.5 * (y + 1.0)
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        if x <= 0.5 {
            1.0 + (1.0 + self.alpha) * (2.0 * x).powf(self.alpha)
        } else {
            2.0
        }
    }

    fn accuracy(&self) -> f64 {
        1e-14
    }

    fn distance(&self, x: f64, y: f64) -> f64 {
        (x - y).abs()
    }

    fn tube(&self, c: f64, eps: f64) -> IntervalSet {
        IntervalSet::from_pieces(
            Interval::new((c - eps).max(0.0), (c + eps).min(1.0))
                .into_iter()
                .collect(),
        )
    }
}

/// `x ↦ d·x mod 1` on the circle `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CircleMap {
    d: u32,
}

impl CircleMap {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("circle map needs d >= 2, got {d}")));
        }
        Ok(CircleMap { d })
    }

    pub fn doubling() -> Self {
        CircleMap { d: 2 }
    }

    pub fn d(&self) -> u32 {
        self.d
    }
}

impl FullBranchMap for CircleMap {
    fn name(&self) -> String {
        format!("circle(d={})", self.d)
    }

    fn branch_count(&self) -> usize {
        self.d as usize
    }

    fn branch_domain(&self, b: usize) -> (f64, f64) {
        let d = self.d as f64;
        (b as f64 / d, (b + 1) as f64 / d)
    }

    fn branch(&self, b: usize, x: f64) -> f64 {
        self.d as f64 * x - b as f64
    }

    fn inverse(&self, b: usize, y: f64) -> f64 {
        (y + b as f64) / self.d as f64
    }

    fn derivative(&self, _x: f64) -> f64 {
        self.d as f64
    }

    fn accuracy(&self) -> f64 {
        1e-15
    }

    fn apply(&self, x: f64) -> f64 {
        (self.d as f64 * x).fract()
    }

    fn distance(&self, x: f64, y: f64) -> f64 {
        let t = (x - y).rem_euclid(1.0);
        t.min(1.0 - t)
    }

    fn tube(&self, c: f64, eps: f64) -> IntervalSet {
        if eps >= 0.5 {
            return IntervalSet::from_pieces(vec![Interval::unit()]);
        }
        let c = c.rem_euclid(1.0);
        let mut pieces = Vec::new();
        pieces.extend(Interval::new((c - eps).max(0.0), (c + eps).min(1.0)));
        if c - eps < 0.0 {
            pieces.extend(Interval::new(c - eps + 1.0, 1.0));
        }
        if c + eps > 1.0 {
            pieces.extend(Interval::new(0.0, c + eps - 1.0));
        }
        IntervalSet::from_pieces(pieces)
    }
}

/// Diagonal expanding endomorphism of the torus `T^n`: coordinate `i` is
/// multiplied by `d_i ≥ 2` mod 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusExpandingMap {
    multipliers: Vec<u32>,
}

// the exact-digit ensembles keep d^P in a u128
pub(crate) const MAX_MULTIPLIER: u32 = 1 << 20;

impl TorusExpandingMap {
    pub fn new(multipliers: Vec<u32>) -> Result<Self> {
        if multipliers.is_empty() {
            return Err(Error::InvalidArgument("torus map needs at least one coordinate".into()));
        }
        if let Some(d) = multipliers.iter().find(|&&d| !(2..=MAX_MULTIPLIER).contains(&d)) {
            return Err(Error::InvalidArgument(format!(
                "torus multipliers must lie in 2..={MAX_MULTIPLIER}, got {d}"
            )));
        }
        Ok(TorusExpandingMap { multipliers })
    }

    /// The doubling map on the circle.
    pub fn doubling() -> Self {
        TorusExpandingMap { multipliers: vec![2] }
    }

    pub fn dimension(&self) -> usize {
        self.multipliers.len()
    }

    pub fn multipliers(&self) -> &[u32] {
        &self.multipliers
    }

    /// The factor acting on coordinate `i`.
    pub fn coordinate(&self, i: usize) -> CircleMap {
        CircleMap { d: self.multipliers[i] }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dimension() {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, the torus has {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(x.iter()
            .zip(&self.multipliers)
            .map(|(&xi, &d)| (d as f64 * xi.rem_euclid(1.0)).fract())
            .collect())
    }

    /// Smallest `k` such that `A^k` maps every ball of radius `eps` onto the
    /// whole torus: `min_i d_i^k · 2 eps ≥ 1`.
    pub fn covering_time(&self, eps: f64) -> Result<u32> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        let d = *self.multipliers.iter().min().expect("nonempty") as f64;
        let mut k = 0;
        let mut width = 2.0 * eps;
        while width < 1.0 {
            width *= d;
            k += 1;
        }
        Ok(k)
    }
}

/// Skew product `(θ, x) ↦ (dθ mod 1, 1 − a x² + α cos 2πθ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VianaMap {
    d: u32,
    a: f64,
    alpha: f64,
}

/// Stand-in for the quadratic parameter; see the README.
pub const DEFAULT_VIANA_A: f64 = 2.0;
pub const DEFAULT_VIANA_ALPHA: f64 = 0.01;

impl VianaMap {
    pub fn new(d: u32, a: f64, alpha: f64) -> Result<Self> {
        if !(16..=MAX_MULTIPLIER).contains(&d) {
            return Err(Error::InvalidArgument(format!(
                "Viana map needs an integer d >= 16, got {d}"
            )));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "quadratic parameter must be positive, got {a}"
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument("coupling alpha must be finite".into()));
        }
        Ok(VianaMap { d, a, alpha })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn apply(&self, theta: f64, x: f64) -> Result<(f64, f64)> {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta must lie in [0, 1), got {theta}")));
        }
        Ok(((self.d as f64 * theta).fract(), self.fiber(theta, x)))
    }

    pub(crate) fn fiber(&self, theta: f64, x: f64) -> f64 {
        1.0 - self.a * x * x + self.alpha * (TAU * theta).cos()
    }

    /// `[1 − a b² − |α|, b]` with `b = 1 + |α|`: the hull of the fiber
    /// images of `[−b, b]`.
    pub fn candidate_interval(&self) -> (f64, f64) {
        let b = 1.0 + self.alpha.abs();
        (1.0 - self.a * b * b - self.alpha.abs(), b)
    }

    /// Whether the candidate interval is forward invariant, which holds
    /// exactly when `a (1 + |α|) ≤ 2`.
    pub fn interval_is_invariant(&self) -> bool {
        self.a * (1.0 + self.alpha.abs()) <= 2.0
    }
}

/// Real function evaluated along orbits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// Indicator of the closed interval `[lo, hi]`.
    Indicator {
        lo: f64,
        hi: f64,
    },
    Constant {
        value: f64,
    },
    Identity,
}

impl Observable {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Observable::Indicator { lo, hi } => f64::from(u8::from(lo <= x && x <= hi)),
            Observable::Constant { value } => value,
            Observable::Identity => x,
        }
    }

    /// Range of values on a coordinate with the given domain.
    pub fn range(&self, domain: (f64, f64)) -> (f64, f64) {
        match *self {
            Observable::Indicator { lo, hi } => {
                let inside = lo <= domain.1 && domain.0 <= hi;
                let covers = lo <= domain.0 && domain.1 <= hi;
                (if covers { 1.0 } else { 0.0 }, if inside { 1.0 } else { 0.0 })
            }
            Observable::Constant { value } => (value, value),
            Observable::Identity => domain,
        }
    }
}
