use num_complex::Complex64;

use super::alphabet::{AlgebraMode, Alphabet};
use super::word::{Polynomial, Word};
use crate::error::{Error, Result};

/// Relations of the inflated algebra, split by how the relaxation uses them.
#[derive(Clone, Debug)]
pub struct RelationSet {
    pub mode: AlgebraMode,
    pub norm_bound: f64,
    /// C²𝟙 − g*g for every unstarred generator (rank-constrained mode).
    pub norm: Vec<Polynomial>,
    /// POVM elements including the completion element (rank-constrained mode).
    pub positivity: Vec<Polynomial>,
    /// Polynomials constrained to vanish under the state (legacy completeness).
    pub equalities: Vec<Polynomial>,
    /// E² − E per projector; enforced by word rewriting.
    pub idempotency: Vec<Polynomial>,
    /// E_a E_b for a ≠ b; enforced by word rewriting.
    pub orthogonality: Vec<Polynomial>,
}

/// Collects the relations for the alphabet's mode with norm bound `c_bound`.
pub fn build_relations(alphabet: &Alphabet, c_bound: f64) -> Result<RelationSet> {
    if !(c_bound > 0.0) || !c_bound.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "norm bound C must be positive, got {c_bound}"
        )));
    }
    let net = alphabet.network();
    let mut rel = RelationSet {
        mode: alphabet.mode(),
        norm_bound: c_bound,
        norm: Vec::new(),
        positivity: Vec::new(),
        equalities: Vec::new(),
        idempotency: Vec::new(),
        orthogonality: Vec::new(),
    };
    let one = Complex64::new(1.0, 0.0);
    match alphabet.mode() {
        AlgebraMode::RankConstrained => {
            for (id, letter) in alphabet.letters().iter().enumerate() {
                if letter.starred {
                    continue;
                }
                let id = id as u16;
                let mut q = Polynomial::constant(Complex64::new(c_bound * c_bound, 0.0));
                if let Some(w) = alphabet.normalize(&[alphabet.star(id), id]) {
                    q.add_term(w, -one);
                }
                rel.norm.push(q);
            }
            for (pi, party) in net.parties.iter().enumerate() {
                for copies in alphabet.party_tuples(pi) {
                    for x in 0..net.setting_count(pi) {
                        for a in 1..=party.outcomes {
                            rel.positivity.push(alphabet.povm_element(pi, a, &copies, x)?);
                        }
                    }
                }
            }
        }
        AlgebraMode::LegacyProjective => {
            for (pi, party) in net.parties.iter().enumerate() {
                for copies in alphabet.party_tuples(pi) {
                    for x in 0..net.setting_count(pi) {
                        let ids: Vec<u16> = (1..=party.outcomes)
                            .map(|a| {
                                alphabet
                                    .find(pi, 0, &copies, x, a, 1)
                                    .ok_or_else(|| Error::OutOfRange("legacy letter".into()))
                            })
                            .collect::<Result<_>>()?;
                        let mut complete = Polynomial::constant(-one);
                        for &id in &ids {
                            complete.add_term(Word::from_slice(&[id]), one);
                            let mut idem = Polynomial::term(Word::from_slice(&[id, id]), one);
                            idem.add_term(Word::from_slice(&[id]), -one);
                            rel.idempotency.push(idem);
                        }
                        rel.equalities.push(complete);
                        for (i, &a) in ids.iter().enumerate() {
                            for &b in &ids[i + 1..] {
                                rel.orthogonality.push(Polynomial::term(Word::from_slice(&[a, b]), one));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rel)
}
