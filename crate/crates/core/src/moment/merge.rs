use num_complex::Complex64;

use super::spec::{MomentContext, WordTable};
use crate::algebra::Word;
use crate::inflation::SymmetryGroup;

/// One SDP moment variable: the class of an orbit key and its adjoint's orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentVariable {
    /// Least of the two orbit keys.
    pub key: Word,
    /// Whether the class is closed under involution (value forced real).
    pub self_adjoint: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WordRef {
    pub var: u32,
    /// ρ(word) is the conjugate of the variable.
    pub conjugate: bool,
}

/// Identification of interned words with SDP variables. Variable 0 is ρ(𝟙).
#[derive(Clone, Debug)]
pub struct VariableTable {
    pub variables: Vec<MomentVariable>,
    pub refs: Vec<WordRef>,
    /// Imaginary parts are dropped everywhere.
    pub all_real: bool,
}

impl VariableTable {
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// Whether variable `v` needs an imaginary slot.
    pub fn is_complex(&self, v: u32) -> bool {
        !self.all_real && !self.variables[v as usize].self_adjoint
    }

    /// Largest disagreement between per-word values mapped to one variable.
    pub fn max_merge_deviation(&self, values: &[Complex64]) -> f64 {
        let mut rep: Vec<Option<Complex64>> = vec![None; self.variables.len()];
        let mut dev: f64 = 0.0;
        for (w, r) in self.refs.iter().enumerate() {
            let v = if r.conjugate { values[w].conj() } else { values[w] };
            match rep[r.var as usize] {
                None => rep[r.var as usize] = Some(v),
                Some(x) => dev = dev.max((x - v).norm()),
            }
            if self.variables[r.var as usize].self_adjoint || self.all_real {
                dev = dev.max(v.im.abs());
            }
        }
        dev
    }
}

/// Identifies words whose orbit keys coincide (with `group`) and pairs each
/// class with its adjoint class. Without a group only adjoint pairs share a
/// variable.
pub fn symmetry_merge(
    ctx: &MomentContext,
    group: Option<&SymmetryGroup>,
    all_real: bool,
) -> VariableTable {
    let table: &WordTable = ctx.table();
    let keys: Vec<Word> = table
        .words()
        .iter()
        .map(|w| match group {
            Some(g) => g.orbit_canonical(w),
            None => w.clone(),
        })
        .collect();
    let mut index: std::collections::HashMap<Word, u32> = std::collections::HashMap::new();
    let mut variables = Vec::new();
    let mut refs = Vec::with_capacity(table.len());
    for id in 0..table.len() as u32 {
        let k = &keys[id as usize];
        let ka = &keys[table.adjoint(id) as usize];
        let (rep, conjugate) = if ka < k { (ka, true) } else { (k, false) };
        let var = *index.entry(rep.clone()).or_insert_with(|| {
            variables.push(MomentVariable {
                key: rep.clone(),
                self_adjoint: k == ka,
            });
            (variables.len() - 1) as u32
        });
        refs.push(WordRef {
            var,
            conjugate: conjugate && !variables[var as usize].self_adjoint,
        });
    }
    VariableTable {
        variables,
        refs,
        all_real,
    }
}
