//! Depth-first enumeration of admissible words.
//!
//! Words come out in lexicographic order. The traversal keeps one stack of
//! successor cursors, so nothing beyond the current word is materialized.
//! Subtrees rooted at a fixed prefix can be walked independently, which is how
//! the counting code splits work across threads.

use crate::symbolic::{ShiftSpace, Word};

/// Streaming iterator over the admissible words of a fixed length that
/// extend a given prefix.
pub struct Words<'a> {
    space: &'a ShiftSpace,
    len: usize,
    prefix_len: usize,
    path: Vec<u8>,
    // cursor[d] = index into successors(path[d-1]) of the next sibling to try at depth d
    cursor: Vec<usize>,
    started: bool,
    done: bool,
}

impl<'a> Words<'a> {
    fn new(space: &'a ShiftSpace, prefix: &[u8], len: usize) -> Self {
        let done = len == 0 || prefix.len() > len || !space.is_admissible(prefix);
        Words {
            space,
            len,
            prefix_len: prefix.len(),
            path: prefix.to_vec(),
            cursor: Vec::with_capacity(len + 1),
            started: false,
            done,
        }
    }

    fn candidates(&self, depth: usize) -> &'a [u8] {
        if depth == 0 {
            const ALL: [u8; 36] = {
                let mut a = [0u8; 36];
                let mut i = 0;
                while i < 36 {
                    a[i] = i as u8;
                    i += 1;
                }
                a
            };
            &ALL[..self.space.alphabet_size()]
        } else {
            self.space.successors(self.path[depth - 1])
        }
    }

    /// Extends `path` to full length taking the first candidate at each depth.
    fn descend(&mut self) -> bool {
        while self.path.len() < self.len {
            let depth = self.path.len();
            let options = self.candidates(depth);
            let Some(&s) = options.first() else {
                return false;
            };
            self.cursor.push(1);
            self.path.push(s);
        }
        true
    }

    /// Moves to the next sibling at the deepest level that has one.
    fn advance(&mut self) -> bool {
        while let Some(next) = self.cursor.pop() {
            self.path.pop();
            let depth = self.path.len();
            let options = self.candidates(depth);
            if next < options.len() {
                self.cursor.push(next + 1);
                self.path.push(options[next]);
                return true;
            }
        }
        false
    }
}

impl Iterator for Words<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.descend() {
                self.done = true;
                return None;
            }
            return Some(Word::from_symbols(self.path.clone()));
        }
        loop {
            if !self.advance() {
                self.done = true;
                return None;
            }
            if self.descend() {
                debug_assert!(self.path.len() >= self.prefix_len);
                return Some(Word::from_symbols(self.path.clone()));
            }
        }
    }
}

impl ShiftSpace {
    /// All admissible words of length `n`, each once, in lexicographic order.
    pub fn words(&self, n: usize) -> Words<'_> {
        Words::new(self, &[], n)
    }

    /// Admissible words of length `n` that begin with `prefix`.
    pub fn words_with_prefix(&self, prefix: &[u8], n: usize) -> Words<'_> {
        Words::new(self, prefix, n)
    }

    /// Admissible words of length `min(depth, n)` used to split an
    /// enumeration of length-`n` words into disjoint subtrees.
    pub fn prefix_blocks(&self, depth: usize, n: usize) -> Vec<Vec<u8>> {
        self.words(depth.min(n).max(1)).map(Word::into_symbols).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(space: &ShiftSpace, n: usize) -> Vec<String> {
        space.words(n).map(|w| w.to_string()).collect()
    }

    #[test]
    fn full_shift_words() {
        let full = ShiftSpace::full(2).unwrap();
        assert_eq!(strings(&full, 1), vec!["0", "1"]);
        assert_eq!(full.words(3).count(), 8);
    }

    #[test]
    fn golden_mean_three_words() {
        let gm = ShiftSpace::golden_mean();
        assert_eq!(strings(&gm, 3), vec!["000", "001", "010", "100", "101"]);
    }

    #[test]
    fn brute_force_filter_agrees() {
        let gm = ShiftSpace::golden_mean();
        for n in 1..=10 {
            let brute: Vec<String> = (0u32..(1 << n))
                .map(|bits| (0..n).rev().map(|i| ((bits >> i) & 1) as u8).collect::<Vec<u8>>())
                .filter(|s| gm.is_admissible(s))
                .map(|s| Word::from_symbols(s).to_string())
                .collect();
            assert_eq!(strings(&gm, n), brute, "n = {n}");
        }
    }

    #[test]
    fn prefix_blocks_partition_the_words() {
        let gm = ShiftSpace::golden_mean();
        let all: Vec<Word> = gm.words(9).collect();
        let mut joined = Vec::new();
        for block in gm.prefix_blocks(4, 9) {
            joined.extend(gm.words_with_prefix(&block, 9));
        }
        assert_eq!(all, joined);
    }

    #[test]
    fn inadmissible_prefix_yields_nothing() {
        let gm = ShiftSpace::golden_mean();
        assert_eq!(gm.words_with_prefix(&[1, 1], 4).count(), 0);
        assert_eq!(gm.words_with_prefix(&[1, 0, 1], 3).count(), 1);
    }
}
