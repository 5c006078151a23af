//! Closed intervals with outward rounding, and finite unions of them.

use serde::Serialize;

/// Closed interval `[lo, hi]`. Constructors round outward so that the
/// stored interval contains the exact one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// `[lo, hi]` exactly as given; `None` if empty or not finite.
    pub fn new(lo: f64, hi: f64) -> Option<Self> {
        (lo.is_finite() && hi.is_finite() && lo <= hi).then_some(Interval { lo, hi })
    }

    /// `[lo - pad, hi + pad]` rounded outward by one ulp on each side.
    pub fn outward(lo: f64, hi: f64, pad: f64) -> Option<Self> {
        Interval::new((lo - pad).next_down(), (hi + pad).next_up())
    }

    pub fn unit() -> Self {
        Interval { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Sorted, pairwise disjoint intervals.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntervalSet {
    pieces: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { pieces: Vec::new() }
    }

    /// Union of arbitrary intervals; overlapping or touching pieces merge.
    pub fn from_pieces(mut pieces: Vec<Interval>) -> Self {
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match out.last_mut() {
                Some(last) if p.lo <= last.hi => last.hi = last.hi.max(p.hi),
                _ => out.push(p),
            }
        }
        IntervalSet { pieces: out }
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn measure(&self) -> f64 {
        self.pieces.iter().map(Interval::width).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        // pieces are sorted, so the candidate is the last one starting at or before x
        let i = self.pieces.partition_point(|p| p.lo <= x);
        i > 0 && self.pieces[i - 1].contains(x)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a, b) = (&self.pieces[i], &other.pieces[j]);
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { pieces: out }
    }

    /// The widest piece; ties go to the leftmost.
    pub fn widest(&self) -> Option<Interval> {
        self.pieces
            .iter()
            .copied()
            .reduce(|best, p| if p.width() > best.width() { p } else { best })
    }
}
