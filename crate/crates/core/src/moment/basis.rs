use std::collections::{BTreeSet, HashSet};

use crate::algebra::{Alphabet, LetterId, Word};

/// Canonical words of degree ≤ k in shortlex order, 𝟙 first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    pub words: Vec<Word>,
    /// `cumulative[d]` = number of basis words of degree ≤ d.
    pub cumulative: Vec<usize>,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn level(&self) -> usize {
        self.cumulative.len() - 1
    }

    /// Words of degree ≤ d.
    pub fn prefix(&self, d: usize) -> &[Word] {
        let d = d.min(self.level());
        &self.words[..self.cumulative[d]]
    }
}

/// All normalized words of length ≤ k over the alphabet.
pub fn enumerate_basis(alphabet: &Alphabet, k: usize) -> MonomialBasis {
    let mut words = vec![Word::identity()];
    let mut cumulative = vec![1];
    let mut seen: HashSet<Word> = HashSet::new();
    seen.insert(Word::identity());
    let mut prev = vec![Word::identity()];
    for d in 1..=k {
        let mut level = BTreeSet::new();
        for w in &prev {
            for l in 0..alphabet.len() as LetterId {
                let mut v = w.0.clone();
                v.push(l);
                if let Some(c) = alphabet.normalize(&v) {
                    if c.len() == d && !seen.contains(&c) {
                        level.insert(c);
                    }
                }
            }
        }
        prev = level.into_iter().collect();
        for w in &prev {
            seen.insert(w.clone());
        }
        words.extend(prev.iter().cloned());
        cumulative.push(words.len());
    }
    MonomialBasis { words, cumulative }
}
