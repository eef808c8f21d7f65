use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::MonomialBasis;
use crate::algebra::{Alphabet, Polynomial, Word};

/// Σ coefficient · ρ(word), words referenced by interned id.
pub type LinearForm = Vec<(u32, Complex64)>;

/// Interns canonical words and remembers each word's adjoint.
#[derive(Clone, Debug)]
pub struct WordTable {
    words: Vec<Word>,
    index: HashMap<Word, u32>,
    adjoint: Vec<u32>,
}

pub const IDENTITY_ID: u32 = 0;

impl WordTable {
    fn new() -> Self {
        let mut t = WordTable {
            words: Vec::new(),
            index: HashMap::new(),
            adjoint: Vec::new(),
        };
        t.push(Word::identity());
        t.adjoint[0] = 0;
        t
    }

    fn push(&mut self, w: Word) -> u32 {
        let id = self.words.len() as u32;
        self.index.insert(w.clone(), id);
        self.words.push(w);
        self.adjoint.push(u32::MAX);
        id
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: u32) -> &Word {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn adjoint(&self, id: u32) -> u32 {
        self.adjoint[id as usize]
    }

    pub fn get(&self, w: &Word) -> Option<u32> {
        self.index.get(w).copied()
    }
}

/// Symmetric symbolic matrix, packed upper triangle (row-major, i ≤ j).
#[derive(Clone, Debug, Default)]
pub struct SymbolicMatrix {
    pub dim: usize,
    pub entries: Vec<LinearForm>,
}

impl SymbolicMatrix {
    pub fn packed_index(dim: usize, i: usize, j: usize) -> usize {
        i * dim - i * (i + 1) / 2 + j
    }

    /// Entry (i, j); entries below the diagonal are conjugates via the table.
    pub fn entry(&self, table: &WordTable, i: usize, j: usize) -> LinearForm {
        if i <= j {
            self.entries[Self::packed_index(self.dim, i, j)].clone()
        } else {
            self.entries[Self::packed_index(self.dim, j, i)]
                .iter()
                .map(|&(w, c)| (table.adjoint(w), c.conj()))
                .collect()
        }
    }

    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, &LinearForm)> {
        let d = self.dim;
        (0..d).flat_map(move |i| (i..d).map(move |j| (i, j))).map(move |(i, j)| {
            (i, j, &self.entries[Self::packed_index(d, i, j)])
        })
    }

    /// Numeric Hermitian matrix for per-word values.
    pub fn instantiate(&self, values: &[Complex64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, form) in self.upper() {
            let v: Complex64 = form.iter().map(|&(w, c)| c * values[w as usize]).sum();
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m
    }
}

pub type MomentMatrixSpec = SymbolicMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalizingKind {
    /// Λ_q ⪰ 0.
    Positive,
    /// Λ_q = 0 entrywise.
    Zero,
}

#[derive(Clone, Debug)]
pub struct LocalizingSpec {
    pub source: Polynomial,
    /// Smallest l with deg q ≤ 2l.
    pub level: usize,
    pub kind: LocalizingKind,
    pub matrix: SymbolicMatrix,
}

impl LocalizingSpec {
    pub fn is_empty(&self) -> bool {
        self.matrix.dim == 0
    }
}

/// Holds the interned words shared by every spec of one relaxation.
pub struct MomentContext<'a> {
    pub alphabet: &'a Alphabet,
    table: WordTable,
    pub warnings: Vec<String>,
}

impl<'a> MomentContext<'a> {
    pub fn new(alphabet: &'a Alphabet) -> Self {
        MomentContext {
            alphabet,
            table: WordTable::new(),
            warnings: Vec::new(),
        }
    }

    pub fn table(&self) -> &WordTable {
        &self.table
    }

    /// Interns a normalized word together with its adjoint.
    pub fn intern(&mut self, w: Word) -> u32 {
        if let Some(id) = self.table.get(&w) {
            return id;
        }
        let adj = self
            .alphabet
            .word_adjoint(&w)
            .expect("adjoint of a nonzero word is nonzero");
        let id = self.table.push(w.clone());
        if adj == w {
            self.table.adjoint[id as usize] = id;
        } else {
            let aid = self.table.push(adj);
            self.table.adjoint[id as usize] = aid;
            self.table.adjoint[aid as usize] = id;
        }
        id
    }

    pub fn linear_form(&mut self, p: &Polynomial) -> LinearForm {
        let mut out = LinearForm::new();
        for (w, c) in p.terms() {
            let id = self.intern(w.clone());
            out.push((id, *c));
        }
        out
    }

    /// Γ_ij = ρ(b_i* b_j).
    pub fn moment_matrix(&mut self, basis: &MonomialBasis) -> MomentMatrixSpec {
        self.matrix_over(basis.prefix(basis.level()), &Polynomial::one())
    }

    /// Λ_ij = ρ(b_i* q b_j) over the degree-(k − l) basis.
    pub fn localizing_matrix(
        &mut self,
        q: &Polynomial,
        basis: &MonomialBasis,
        k: usize,
        kind: LocalizingKind,
    ) -> LocalizingSpec {
        let level = q.degree().div_ceil(2);
        if k < level {
            self.warnings.push(format!(
                "constraint of degree {} needs level {level} > k = {k}; deferred",
                q.degree()
            ));
            return LocalizingSpec {
                source: q.clone(),
                level,
                kind,
                matrix: SymbolicMatrix::default(),
            };
        }
        let words = basis.prefix(k - level).to_vec();
        LocalizingSpec {
            source: q.clone(),
            level,
            kind,
            matrix: self.matrix_over(&words, q),
        }
    }

    fn matrix_over(&mut self, words: &[Word], q: &Polynomial) -> SymbolicMatrix {
        let d = words.len();
        let mut entries = Vec::with_capacity(d * (d + 1) / 2);
        let terms: Vec<(Word, Complex64)> = q.terms().map(|(w, c)| (w.clone(), *c)).collect();
        for i in 0..d {
            for j in i..d {
                let mut form = LinearForm::new();
                for (w, c) in &terms {
                    if let Some(nw) = self.alphabet.sandwich(&words[i], w, &words[j]) {
                        let id = self.intern(nw);
                        match form.iter_mut().find(|(x, _)| *x == id) {
                            Some(slot) => slot.1 += c,
                            None => form.push((id, *c)),
                        }
                    }
                }
                form.retain(|(_, c)| *c != Complex64::new(0.0, 0.0));
                entries.push(form);
            }
        }
        SymbolicMatrix { dim: d, entries }
    }
}
