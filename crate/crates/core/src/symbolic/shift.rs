use std::fmt;

use crate::error::{Error, Result};
use crate::symbolic::Word;

/// Largest alphabet representable with single base-36 digits.
pub const MAX_ALPHABET: usize = 36;

/// A one-sided subshift of finite type given by a 0/1 transition matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct ShiftSpace {
    size: usize,
    allowed: Vec<bool>,
    successors: Vec<Vec<u8>>,
}

impl ShiftSpace {
    /// Builds a shift from transition rows. Every symbol must have at least
    /// one successor and one predecessor.
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self> {
        let size = rows.len();
        if size < 2 {
            return Err(Error::InvalidShift(format!(
                "alphabet size must be at least 2, got {size}"
            )));
        }
        if size > MAX_ALPHABET {
            return Err(Error::InvalidShift(format!(
                "alphabet size {size} exceeds {MAX_ALPHABET}"
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidShift(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            if !row.iter().any(|&b| b) {
                return Err(Error::InvalidShift(format!("symbol {i} has no successor")));
            }
        }
        for j in 0..size {
            if !rows.iter().any(|row| row[j]) {
                return Err(Error::InvalidShift(format!("symbol {j} has no predecessor")));
            }
        }
        let allowed: Vec<bool> = rows.iter().flatten().copied().collect();
        let successors = (0..size)
            .map(|i| (0..size).filter(|&j| rows[i][j]).map(|j| j as u8).collect())
            .collect();
        Ok(ShiftSpace {
            size,
            allowed,
            successors,
        })
    }

    /// Parses rows written as 0/1 strings, e.g. `["11", "10"]`.
    pub fn from_row_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let parsed = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.as_ref()
                    .trim()
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::InvalidShift(format!(
                            "row {i}: expected 0 or 1, found {other:?}"
                        ))),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ShiftSpace::new(parsed)
    }

    pub fn full(size: usize) -> Result<Self> {
        ShiftSpace::new(vec![vec![true; size]; size])
    }

    /// The golden-mean shift on {0, 1}: the word `11` is forbidden.
    pub fn golden_mean() -> Self {
        ShiftSpace::new(vec![vec![true, true], vec![true, false]]).expect("valid golden-mean shift")
    }

    pub fn alphabet_size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn allows(&self, a: u8, b: u8) -> bool {
        self.allowed[a as usize * self.size + b as usize]
    }

    #[inline]
    pub fn successors(&self, a: u8) -> &[u8] {
        &self.successors[a as usize]
    }

    pub fn is_full(&self) -> bool {
        self.allowed.iter().all(|&b| b)
    }

    pub fn is_admissible(&self, symbols: &[u8]) -> bool {
        symbols.iter().all(|&s| (s as usize) < self.size) && symbols.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// Validates and wraps a symbol sequence as a word of this shift.
    pub fn word(&self, symbols: Vec<u8>) -> Result<Word> {
        if symbols.is_empty() {
            return Err(Error::InvalidArgument("words must be nonempty".into()));
        }
        if !self.is_admissible(&symbols) {
            return Err(Error::InadmissibleWord(Word::from_symbols(symbols).to_string()));
        }
        Ok(Word::from_symbols(symbols))
    }

    /// Parses a word written with base-36 digits and checks admissibility.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let symbols = text
            .trim()
            .chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .filter(|&d| (d as usize) < self.size)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad symbol {c:?} in {text:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        self.word(symbols)
    }

    /// Transition matrix as integer entries.
    pub fn matrix(&self) -> Vec<Vec<u64>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.allowed[i * self.size + j] as u64).collect())
            .collect()
    }

    /// Number of admissible words of length `n`, by matrix powers.
    pub fn count_words(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let k = self.size;
        let mut counts = vec![1u128; k];
        for _ in 1..n {
            let mut next = vec![0u128; k];
            for (i, slot) in next.iter_mut().enumerate() {
                *slot = self.successors[i].iter().map(|&j| counts[j as usize]).sum();
            }
            counts = next;
        }
        counts.iter().sum()
    }

    /// Uniform specification gap of a mixing shift.
    ///
    /// Returns 0 when every transition is allowed, and otherwise the smallest
    /// `m >= 1` with `A^m` entrywise positive. Any two admissible words can
    /// be joined through a bridge of exactly this many symbols.
    pub fn mixing_gap(&self) -> Result<usize> {
        if self.is_full() {
            return Ok(0);
        }
        let k = self.size;
        // Wielandt: a primitive k x k matrix has A^m > 0 for some m <= (k-1)^2 + 1.
        let limit = (k - 1) * (k - 1) + 1;
        let step = |reach: &[bool]| -> Vec<bool> {
            let mut next = vec![false; k * k];
            for i in 0..k {
                for mid in 0..k {
                    if reach[i * k + mid] {
                        for &j in self.successors(mid as u8) {
                            next[i * k + j as usize] = true;
                        }
                    }
                }
            }
            next
        };
        let mut reach = self.allowed.clone();
        for m in 1..=limit {
            if reach.iter().all(|&b| b) {
                return Ok(m);
            }
            reach = step(&reach);
        }
        Err(Error::NotPrimitive)
    }

    /// Lexicographically smallest `b` of length `len` with `a b c` admissible.
    pub fn smallest_bridge(&self, a: u8, c: u8, len: usize) -> Option<Vec<u8>> {
        if len == 0 {
            return self.allows(a, c).then(Vec::new);
        }
        let mut bridge = Vec::with_capacity(len);
        self.bridge_search(a, c, len, &mut bridge).then_some(bridge)
    }

    fn bridge_search(&self, prev: u8, target: u8, len: usize, out: &mut Vec<u8>) -> bool {
        if out.len() == len {
            return self.allows(prev, target);
        }
        for &s in self.successors(prev) {
            out.push(s);
            if self.bridge_search(s, target, len, out) {
                return true;
            }
            out.pop();
        }
        false
    }
}

impl fmt::Debug for ShiftSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.size)
            .map(|i| {
                (0..self.size)
                    .map(|j| if self.allows(i as u8, j as u8) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        f.debug_struct("ShiftSpace")
            .field("alphabet_size", &self.size)
            .field("rows", &rows)
            .finish()
    }
}
