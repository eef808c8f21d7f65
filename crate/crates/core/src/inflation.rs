//! Permutation symmetry of inflation copies: one S_n per latent source.

use std::collections::{HashSet, VecDeque};

use smallvec::SmallVec;

use crate::algebra::{Alphabet, LetterId, Polynomial, Word};
use crate::error::{Error, Result};

/// One permutation of {1..n} per latent source; `perms[s][i-1]` is the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermutationTuple {
    pub perms: Vec<Vec<u8>>,
}

impl PermutationTuple {
    pub fn identity(sources: usize, n: usize) -> Self {
        PermutationTuple {
            perms: vec![(1..=n as u8).collect(); sources],
        }
    }

    pub fn is_valid(&self, sources: usize, n: usize) -> bool {
        self.perms.len() == sources
            && self.perms.iter().all(|p| {
                let mut seen = vec![false; n];
                p.len() == n
                    && p.iter().all(|&v| {
                        let ok = v >= 1 && (v as usize) <= n && !seen[v as usize - 1];
                        if ok {
                            seen[v as usize - 1] = true;
                        }
                        ok
                    })
            })
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PermutationTuple) -> PermutationTuple {
        PermutationTuple {
            perms: self
                .perms
                .iter()
                .zip(&other.perms)
                .map(|(g, h)| h.iter().map(|&i| g[i as usize - 1]).collect())
                .collect(),
        }
    }
}

/// Image of every letter under one group element.
type LetterMap = Vec<LetterId>;

/// Product of symmetric groups acting on an alphabet.
///
/// Full enumeration is used while (n!)^L ≤ 10⁴; beyond that orbits are
/// closed under adjacent transpositions of each source.
pub struct SymmetryGroup<'a> {
    alphabet: &'a Alphabet,
    sources: usize,
    full: bool,
    maps: Vec<LetterMap>,
}

pub const FULL_ENUMERATION_LIMIT: u128 = 10_000;

fn all_permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (1..=n as u8).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

impl<'a> SymmetryGroup<'a> {
    pub fn new(alphabet: &'a Alphabet) -> Self {
        let n = alphabet.n();
        let sources = alphabet.network().sources.len();
        let order = Self::order_of(n, sources);
        let full = order <= FULL_ENUMERATION_LIMIT;
        let mut group = SymmetryGroup {
            alphabet,
            sources,
            full,
            maps: Vec::new(),
        };
        let elements: Vec<PermutationTuple> = if full {
            group.enumerate_elements()
        } else {
            let mut gens = Vec::new();
            for s in 0..sources {
                for i in 0..n - 1 {
                    let mut g = PermutationTuple::identity(sources, n);
                    g.perms[s].swap(i, i + 1);
                    gens.push(g);
                }
            }
            gens
        };
        group.maps = elements.iter().map(|g| group.letter_map(g)).collect();
        group
    }

    fn order_of(n: usize, sources: usize) -> u128 {
        let fact: u128 = (1..=n as u128).product();
        fact.checked_pow(sources as u32).unwrap_or(u128::MAX)
    }

    /// (n!)^L, saturating.
    pub fn order(&self) -> u128 {
        Self::order_of(self.alphabet.n(), self.sources)
    }

    pub fn is_fully_enumerated(&self) -> bool {
        self.full
    }

    pub fn source_count(&self) -> usize {
        self.sources
    }

    /// Every group element (only meaningful below the enumeration limit).
    pub fn enumerate_elements(&self) -> Vec<PermutationTuple> {
        let perms = all_permutations(self.alphabet.n());
        let mut out = vec![PermutationTuple { perms: Vec::new() }];
        for _ in 0..self.sources {
            let mut next = Vec::with_capacity(out.len() * perms.len());
            for g in &out {
                for p in &perms {
                    let mut h = g.clone();
                    h.perms.push(p.clone());
                    next.push(h);
                }
            }
            out = next;
        }
        out
    }

    fn letter_map(&self, g: &PermutationTuple) -> LetterMap {
        (0..self.alphabet.len() as LetterId)
            .map(|id| {
                let copies: SmallVec<[u8; 4]> = self
                    .alphabet
                    .letter(id)
                    .copies
                    .iter()
                    .zip(self.alphabet.letter_sources(id))
                    .map(|(&c, &s)| g.perms[s as usize][c as usize - 1])
                    .collect();
                self.alphabet
                    .with_copies(id, &copies)
                    .expect("permuted letter exists")
            })
            .collect()
    }

    fn apply_map(&self, map: &LetterMap, w: &Word) -> Word {
        let v: SmallVec<[LetterId; 16]> = w.letters().iter().map(|&l| map[l as usize]).collect();
        self.alphabet.canonicalize(&v)
    }

    /// Remaps every inflation index by the permutation of its source and
    /// re-canonicalizes.
    pub fn act(&self, g: &PermutationTuple, w: &Word) -> Result<Word> {
        let n = self.alphabet.n();
        if !g.is_valid(self.sources, n) {
            return Err(Error::OutOfRange(format!(
                "permutation tuple is not {} permutations of 1..{n}",
                self.sources
            )));
        }
        if w.letters().iter().any(|&l| l as usize >= self.alphabet.len()) {
            return Err(Error::OutOfRange("letter outside the alphabet".into()));
        }
        Ok(self.apply_map(&self.letter_map(g), w))
    }

    /// Least word (shortlex) in the orbit of `w`.
    pub fn orbit_canonical(&self, w: &Word) -> Word {
        if self.alphabet.n() == 1 || w.is_identity() {
            return self.alphabet.canonicalize(w.letters());
        }
        if self.full {
            self.maps
                .iter()
                .map(|m| self.apply_map(m, w))
                .min()
                .expect("group is nonempty")
        } else {
            self.orbit(w).into_iter().min().expect("orbit is nonempty")
        }
    }

    /// All distinct canonical words in the orbit of `w`.
    pub fn orbit(&self, w: &Word) -> Vec<Word> {
        let start = self.alphabet.canonicalize(w.letters());
        if self.full {
            let set: HashSet<Word> = self.maps.iter().map(|m| self.apply_map(m, &start)).collect();
            let mut v: Vec<Word> = set.into_iter().collect();
            v.sort();
            return v;
        }
        let mut seen: HashSet<Word> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            for m in &self.maps {
                let next = self.apply_map(m, &cur);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        let mut v: Vec<Word> = seen.into_iter().collect();
        v.sort();
        v
    }
}

/// Replaces inflation index 1 by `j` in every tuple position of `p`.
pub fn diagonal_embed(alphabet: &Alphabet, p: &Polynomial, j: usize) -> Result<Polynomial> {
    if j < 1 || j > alphabet.n() {
        return Err(Error::OutOfRange(format!(
            "copy {j} outside 1..{}",
            alphabet.n()
        )));
    }
    let mut out = Polynomial::zero();
    for (w, c) in p.terms() {
        let mut v: SmallVec<[LetterId; 16]> = SmallVec::new();
        for &l in w.letters() {
            let letter = alphabet.letter(l);
            if letter.copies.iter().any(|&c| c != 1) {
                return Err(Error::InvalidParameter(format!(
                    "letter {} carries an inflation index other than 1",
                    alphabet.letter_label(l)
                )));
            }
            let copies: SmallVec<[u8; 4]> = letter.copies.iter().map(|_| j as u8).collect();
            v.push(alphabet.with_copies(l, &copies).expect("embedded letter exists"));
        }
        if let Some(nw) = alphabet.normalize(&v) {
            out.add_term(nw, *c);
        }
    }
    Ok(out)
}
