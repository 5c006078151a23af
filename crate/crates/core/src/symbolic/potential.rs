use crate::error::{Error, Result};
use crate::symbolic::{ShiftMetric, ShiftSpace, Word};

/// A locally constant function on a shift: its value at a point depends only
/// on the first `memory` symbols.
///
/// Values are stored densely over all `k^memory` blocks; inadmissible blocks
/// hold `NaN` and are never read by the public API.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    space: ShiftSpace,
    memory: usize,
    values: Vec<f64>,
}

/// Dense tables above this size are refused.
const MAX_TABLE: usize = 1 << 22;

impl Potential {
    /// Tabulates `f` on every admissible `memory`-word.
    pub fn from_fn(space: &ShiftSpace, memory: usize, f: impl Fn(&[u8]) -> f64) -> Result<Self> {
        let k = space.alphabet_size();
        if memory == 0 {
            return Err(Error::InvalidPotential("memory must be at least 1".into()));
        }
        let size = k
            .checked_pow(memory as u32)
            .filter(|&s| s <= MAX_TABLE)
            .ok_or_else(|| Error::InvalidPotential(format!("memory {memory} is too large")))?;
        let mut values = vec![f64::NAN; size];
        for w in space.words(memory) {
            let v = f(w.symbols());
            if !v.is_finite() {
                return Err(Error::InvalidPotential(format!("non-finite value at {w}")));
            }
            values[index_of(k, w.symbols())] = v;
        }
        Ok(Potential {
            space: space.clone(),
            memory,
            values,
        })
    }

    /// Builds a potential from explicit `(word, value)` entries. Every
    /// admissible `memory`-word must appear exactly once.
    pub fn from_table(space: &ShiftSpace, memory: usize, entries: &[(Word, f64)]) -> Result<Self> {
        let k = space.alphabet_size();
        let mut table = Potential::from_fn(space, memory, |_| 0.0)?;
        let mut seen = vec![false; table.values.len()];
        for (w, v) in entries {
            if w.len() != memory {
                return Err(Error::InvalidPotential(format!(
                    "entry {w} has length {}, expected memory {memory}",
                    w.len()
                )));
            }
            if !space.is_admissible(w.symbols()) {
                return Err(Error::InvalidPotential(format!("entry {w} is not admissible")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidPotential(format!("non-finite value at {w}")));
            }
            let i = index_of(k, w.symbols());
            if seen[i] {
                return Err(Error::InvalidPotential(format!("duplicate entry {w}")));
            }
            seen[i] = true;
            table.values[i] = *v;
        }
        if let Some(missing) = space.words(memory).find(|w| !seen[index_of(k, w.symbols())]) {
            return Err(Error::InvalidPotential(format!("missing entry for {missing}")));
        }
        Ok(table)
    }

    pub fn constant(space: &ShiftSpace, c: f64) -> Self {
        Potential::from_fn(space, 1, |_| c).expect("memory-1 constant potential")
    }

    /// Indicator of the cylinder `[symbol]`.
    pub fn indicator(space: &ShiftSpace, symbol: u8) -> Self {
        Potential::from_fn(space, 1, |w| if w[0] == symbol { 1.0 } else { 0.0 }).expect("memory-1 indicator potential")
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Value on an admissible block of length `memory`.
    ///
    /// # Panics
    /// If `window` has the wrong length (debug builds) or is inadmissible.
    #[inline]
    pub fn value(&self, window: &[u8]) -> f64 {
        debug_assert_eq!(window.len(), self.memory);
        let v = self.values[index_of(self.space.alphabet_size(), window)];
        assert!(!v.is_nan(), "potential evaluated on an inadmissible block");
        v
    }

    pub fn get(&self, window: &[u8]) -> Option<f64> {
        if window.len() != self.memory || !self.space.is_admissible(window) {
            return None;
        }
        Some(self.values[index_of(self.space.alphabet_size(), window)])
    }

    /// `(word, value)` pairs over admissible blocks, in lexicographic order.
    pub fn table(&self) -> Vec<(Word, f64)> {
        self.space
            .words(self.memory)
            .map(|w| {
                let v = self.value(w.symbols());
                (w, v)
            })
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.admissible_values().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.admissible_values().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Supremum norm.
    pub fn sup_norm(&self) -> f64 {
        self.admissible_values().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn admissible_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|v| !v.is_nan())
    }

    /// Re-expresses the potential with a longer memory.
    pub fn lift(&self, memory: usize) -> Result<Self> {
        if memory < self.memory {
            return Err(Error::InvalidPotential(format!(
                "cannot lower memory from {} to {memory}",
                self.memory
            )));
        }
        Potential::from_fn(&self.space, memory, |w| self.value(&w[..self.memory]))
    }

    /// `a·self + b·other`, at the larger of the two memories.
    pub fn combine(&self, a: f64, other: &Potential, b: f64) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::InvalidPotential("potentials live on different shifts".into()));
        }
        let m = self.memory.max(other.memory);
        Potential::from_fn(&self.space, m, |w| {
            a * self.value(&w[..self.memory]) + b * other.value(&w[..other.memory])
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut().filter(|v| !v.is_nan()) {
            *v *= a;
        }
        out
    }

    /// Birkhoff sum `S_n pot` over the periodic extension of `w`, with
    /// `n = |w|`.
    ///
    /// The last `memory - 1` windows read past the end of `w`; those positions
    /// are filled from the periodic extension. Where the periodic symbol cannot
    /// follow the previous one, the smallest admissible successor is used, so
    /// every window is admissible.
    pub fn birkhoff_sum(&self, w: &Word) -> Result<f64> {
        let s = w.symbols();
        if s.len() < self.memory {
            return Err(Error::WordTooShort {
                len: s.len(),
                memory: self.memory,
            });
        }
        Ok(self.interior_sum(s) + self.closing_sum(s))
    }

    pub fn birkhoff_average(&self, w: &Word) -> Result<f64> {
        Ok(self.birkhoff_sum(w)? / w.len() as f64)
    }

    /// Sum over the windows that fit entirely inside `s`.
    pub(crate) fn interior_sum(&self, s: &[u8]) -> f64 {
        s.windows(self.memory).map(|w| self.value(w)).sum()
    }

    /// Sum over the `memory - 1` windows that start inside `s` and run past
    /// its end.
    pub(crate) fn closing_sum(&self, s: &[u8]) -> f64 {
        let m = self.memory;
        let n = s.len();
        if m == 1 {
            return 0.0;
        }
        let mut buf = [0u8; 64];
        let mut total = 0.0;
        for start in (n + 1).saturating_sub(m)..n {
            let window = self.extended_window(s, start, &mut buf);
            total += self.value(window);
        }
        total
    }

    fn extended_window<'b>(&self, s: &[u8], start: usize, buf: &'b mut [u8; 64]) -> &'b [u8] {
        let m = self.memory;
        let n = s.len();
        let mut prev = None;
        for (j, slot) in buf.iter_mut().take(m).enumerate() {
            let pos = start + j;
            let sym = if pos < n {
                s[pos]
            } else {
                let wanted = s[pos % n];
                let p: u8 = prev.expect("window starts inside the word");
                if self.space.allows(p, wanted) {
                    wanted
                } else {
                    self.space.successors(p)[0]
                }
            };
            *slot = sym;
            prev = Some(sym);
        }
        &buf[..m]
    }

    /// Sum of the first `n` windows of a point whose known prefix is `s`:
    /// `Σ_{i<n} pot(s[i..i+memory])`. Requires `|s| >= n + memory - 1`.
    pub fn orbit_sum(&self, s: &[u8], n: usize) -> Result<f64> {
        if s.len() + 1 < n + self.memory {
            return Err(Error::WordTooShort {
                len: s.len(),
                memory: n + self.memory - 1,
            });
        }
        Ok(s[..n + self.memory - 1]
            .windows(self.memory)
            .map(|w| self.value(w))
            .sum())
    }

    /// `sup { |pot(x) - pot(y)| : d(x, y) <= eps }` under the metric.
    ///
    /// Points within distance `eps` share their first `j` symbols, where `j`
    /// is the smallest integer with `θ^j <= eps`. The potential only sees the
    /// first `memory` symbols, so the oscillation vanishes once `j >= memory`.
    pub fn variation(&self, metric: &ShiftMetric, eps: f64) -> f64 {
        let shared = metric.closed_ball_depth(eps);
        if shared >= self.memory {
            return 0.0;
        }
        let mut best = 0.0f64;
        let mut groups: std::collections::BTreeMap<Vec<u8>, (f64, f64)> = Default::default();
        for w in self.space.words(self.memory) {
            let v = self.value(w.symbols());
            let e = groups
                .entry(w.symbols()[..shared].to_vec())
                .or_insert((f64::INFINITY, f64::NEG_INFINITY));
            e.0 = e.0.min(v);
            e.1 = e.1.max(v);
        }
        for (lo, hi) in groups.values() {
            best = best.max(hi - lo);
        }
        best
    }
}

#[inline]
fn index_of(k: usize, window: &[u8]) -> usize {
    window.iter().fold(0usize, |acc, &s| acc * k + s as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(space: &ShiftSpace, s: &str) -> Word {
        space.parse_word(s).unwrap()
    }

    #[test]
    fn indicator_counts_ones() {
        let full = ShiftSpace::full(2).unwrap();
        let pot = Potential::indicator(&full, 1);
        assert_eq!(pot.birkhoff_sum(&word(&full, "0110")).unwrap(), 2.0);
    }

    #[test]
    fn constant_sum_is_n_times_c() {
        let full = ShiftSpace::full(2).unwrap();
        let pot = Potential::constant(&full, 0.75);
        assert_eq!(pot.birkhoff_sum(&word(&full, "01101")).unwrap(), 5.0 * 0.75);
    }

    #[test]
    fn memory_two_periodic_closure() {
        let gm = ShiftSpace::golden_mean();
        let pot = Potential::from_fn(&gm, 2, |w| if w == [1, 0] { 1.0 } else { 0.0 }).unwrap();
        // windows 10, 01, 10, and the closing window 0|1 -> 01
        assert_eq!(pot.birkhoff_sum(&word(&gm, "1010")).unwrap(), 2.0);
        // closing window of 101 would be 11; falls back to 10
        assert_eq!(pot.birkhoff_sum(&word(&gm, "101")).unwrap(), 2.0);
    }

    #[test]
    fn too_short_is_rejected() {
        let gm = ShiftSpace::golden_mean();
        let pot = Potential::from_fn(&gm, 2, |_| 1.0).unwrap();
        assert_eq!(
            pot.birkhoff_sum(&word(&gm, "1")),
            Err(Error::WordTooShort { len: 1, memory: 2 })
        );
    }

    #[test]
    fn table_validation() {
        let gm = ShiftSpace::golden_mean();
        let w = |s: &str| gm.parse_word(s).unwrap();
        let ok = Potential::from_table(&gm, 2, &[(w("00"), 1.0), (w("01"), 2.0), (w("10"), 3.0)]);
        assert_eq!(ok.unwrap().get(&[0, 1]), Some(2.0));
        let missing = Potential::from_table(&gm, 2, &[(w("00"), 1.0), (w("01"), 2.0)]);
        assert!(missing.is_err());
        let inadmissible = Potential::from_table(&gm, 2, &[(Word::from_symbols(vec![1, 1]), 1.0)]);
        assert!(inadmissible.is_err());
    }

    #[test]
    fn variation_examples() {
        let metric = ShiftMetric::default();
        let full = ShiftSpace::full(2).unwrap();
        let pot = Potential::indicator(&full, 1);
        assert_eq!(pot.variation(&metric, 0.25), 0.0);
        assert_eq!(pot.variation(&metric, 1.0), 1.0);

        // brute force over pairs of admissible 2-words sharing the first symbol
        let gm = ShiftSpace::golden_mean();
        let pot2 = Potential::from_fn(&gm, 2, |w| (3 * w[0] + 5 * w[1]) as f64 * 0.1).unwrap();
        let words: Vec<Word> = gm.words(2).collect();
        let mut brute = 0.0f64;
        for a in &words {
            for b in &words {
                if a[0] == b[0] {
                    let d = (pot2.value(a.symbols()) - pot2.value(b.symbols())).abs();
                    brute = brute.max(d);
                }
            }
        }
        assert_eq!(pot2.variation(&metric, 0.5), brute);
        assert!(brute > 0.0);
        assert_eq!(pot2.variation(&metric, 0.49), 0.0);
    }

    #[test]
    fn combine_lifts_memory() {
        let gm = ShiftSpace::golden_mean();
        let a = Potential::indicator(&gm, 1);
        let b = Potential::from_fn(&gm, 2, |w| if w == [0, 0] { 1.0 } else { 0.0 }).unwrap();
        let c = a.combine(2.0, &b, -1.0).unwrap();
        assert_eq!(c.memory(), 2);
        assert_eq!(c.get(&[1, 0]), Some(2.0));
        assert_eq!(c.get(&[0, 0]), Some(-1.0));
        assert_eq!(c.get(&[1, 1]), None);
    }
}
