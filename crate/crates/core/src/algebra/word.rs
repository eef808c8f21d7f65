use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64;
use smallvec::SmallVec;

pub type LetterId = u16;

/// A monomial as a sequence of interned letters; the empty word is 𝟙.
/// Ordered shortlex: by length, then lexicographically by letter id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub SmallVec<[LetterId; 12]>);

impl Word {
    pub fn identity() -> Self {
        Word(SmallVec::new())
    }

    pub fn from_slice(ids: &[LetterId]) -> Self {
        Word(SmallVec::from_slice(ids))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[LetterId] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finite linear combination of canonical words. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Word, Complex64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial::term(Word::identity(), c)
    }

    pub fn term(w: Word, c: Complex64) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(w, c);
        p
    }

    /// Adds `c·w`; `w` must already be canonical.
    pub fn add_term(&mut self, w: Word, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == Complex64::new(0.0, 0.0) {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&mut self, other: &Polynomial) {
        for (w, c) in &other.terms {
            self.add_term(w.clone(), *c);
        }
    }

    pub fn sub(&mut self, other: &Polynomial) {
        for (w, c) in &other.terms {
            self.add_term(w.clone(), -*c);
        }
    }

    pub fn scaled(&self, s: Complex64) -> Polynomial {
        let mut p = Polynomial::zero();
        for (w, c) in &self.terms {
            p.add_term(w.clone(), c * s);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn coefficient(&self, w: &Word) -> Complex64 {
        self.terms.get(w).copied().unwrap_or_default()
    }

    /// Largest coefficient deviation between two polynomials.
    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        let mut d: f64 = 0.0;
        for (w, c) in &self.terms {
            d = d.max((c - other.coefficient(w)).norm());
        }
        for (w, c) in &other.terms {
            if !self.terms.contains_key(w) {
                d = d.max(c.norm());
            }
        }
        d
    }
}
