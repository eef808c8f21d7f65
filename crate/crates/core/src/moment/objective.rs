use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Alphabet, Polynomial};
use crate::error::{Error, Result};
use crate::inflation::diagonal_embed;
use crate::scenario::TargetCell;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ObjectiveMode {
    PolarizedObjective,
    LinearConstraints,
    QuadraticEpigraph,
}

/// `coefficient · ρ(f₁)·ρ(f₂)⋯` with every factor over copy-1 letters.
#[derive(Clone, Debug)]
pub struct StateTerm {
    pub coefficient: f64,
    pub factors: Vec<Polynomial>,
}

/// Polynomial in the state; degree is the largest factor count.
#[derive(Clone, Debug, Default)]
pub struct StatePolynomial {
    pub terms: Vec<StateTerm>,
}

impl StatePolynomial {
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.factors.len()).max().unwrap_or(0)
    }
}

/// Linearizes a state polynomial: the j-th factor of each product moves to copy j.
pub fn polarize(alphabet: &Alphabet, objective: &StatePolynomial) -> Result<Polynomial> {
    let g = objective.degree();
    if g > alphabet.n() {
        return Err(Error::InvalidParameter(format!(
            "objective of degree {g} needs inflation level n >= {g}, got {}",
            alphabet.n()
        )));
    }
    let mut out = Polynomial::zero();
    for term in &objective.terms {
        let mut prod = Polynomial::one();
        for (j, f) in term.factors.iter().enumerate() {
            prod = alphabet.mul(&prod, &diagonal_embed(alphabet, f, j + 1)?);
        }
        out.add(&prod.scaled(Complex64::new(term.coefficient, 0.0)));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbabilityOptions {
    pub legacy_marginals: bool,
}

/// Objective and constraints tying the relaxation to a target distribution.
#[derive(Clone, Debug, Default)]
pub struct ProbabilityBundle {
    /// Minimize Re ρ(objective).
    pub objective: Polynomial,
    /// ρ(p) = value.
    pub equalities: Vec<(Polynomial, f64)>,
    /// Cells (W_c, p_c) with Σ (ρ(W_c) − p_c)² ≤ t; empty outside epigraph mode.
    pub epigraph: Vec<(Polynomial, f64)>,
    pub warnings: Vec<String>,
}

/// Π_parties POVM element of a cell, all inflation indices 1.
pub fn cell_polynomial(alphabet: &Alphabet, cell: &TargetCell) -> Result<Polynomial> {
    let net = alphabet.network();
    if cell.outcomes.len() != net.parties.len() || cell.settings.len() != net.settings.len() {
        return Err(Error::Dimension("target cell does not match the network".into()));
    }
    let mut prod = Polynomial::one();
    for (pi, party) in net.parties.iter().enumerate() {
        let values: Vec<usize> = party.settings.iter().map(|&x| cell.settings[x]).collect();
        let x = net.encode_setting(pi, &values);
        let copies = vec![1u8; alphabet.party_arity(pi)];
        let e = alphabet.povm_element(pi, cell.outcomes[pi] + 1, &copies, x)?;
        prod = alphabet.mul(&prod, &e);
    }
    Ok(prod)
}

/// Builds the bundle for one of the three compatibility formulations.
pub fn probability_constraints(
    alphabet: &Alphabet,
    cells: &[TargetCell],
    mode: ObjectiveMode,
    options: ProbabilityOptions,
    k: usize,
) -> Result<ProbabilityBundle> {
    check_normalized(cells)?;
    let mut bundle = ProbabilityBundle::default();
    let words: Vec<Polynomial> = cells
        .iter()
        .map(|c| cell_polynomial(alphabet, c))
        .collect::<Result<_>>()?;
    if let Some(d) = words.iter().map(Polynomial::degree).max() {
        if d > 2 * k {
            bundle.warnings.push(format!(
                "probability monomials have degree {d} > 2k = {}; they enter only through the target constraints",
                2 * k
            ));
        }
    }
    match mode {
        ObjectiveMode::PolarizedObjective => {
            let mut obj = StatePolynomial::default();
            for (w, c) in words.iter().zip(cells) {
                obj.terms.push(StateTerm {
                    coefficient: 1.0,
                    factors: vec![w.clone(), w.clone()],
                });
                obj.terms.push(StateTerm {
                    coefficient: -2.0 * c.probability,
                    factors: vec![w.clone()],
                });
                obj.terms.push(StateTerm {
                    coefficient: c.probability * c.probability,
                    factors: vec![],
                });
            }
            bundle.objective = polarize(alphabet, &obj)?;
        }
        ObjectiveMode::LinearConstraints => {
            for (w, c) in words.iter().zip(cells) {
                bundle.equalities.push((w.clone(), c.probability));
            }
        }
        ObjectiveMode::QuadraticEpigraph => {
            for (w, c) in words.iter().zip(cells) {
                bundle.epigraph.push((w.clone(), c.probability));
            }
        }
    }
    if options.legacy_marginals {
        legacy_marginals(alphabet, &words, cells, &mut bundle)?;
    }
    Ok(bundle)
}

const MARGINAL_PRODUCT_LIMIT: usize = 100_000;

/// ρ(Π_{i≤g} W_{c_i}^{(i)}) = Π p_{c_i} for g = 1..n.
fn legacy_marginals(
    alphabet: &Alphabet,
    words: &[Polynomial],
    cells: &[TargetCell],
    bundle: &mut ProbabilityBundle,
) -> Result<()> {
    let t = cells.len();
    let mut embedded: Vec<Vec<Polynomial>> = Vec::new();
    for j in 1..=alphabet.n() {
        embedded.push(
            words
                .iter()
                .map(|w| diagonal_embed(alphabet, w, j))
                .collect::<Result<_>>()?,
        );
    }
    for g in 1..=alphabet.n() {
        let count = t.checked_pow(g as u32).unwrap_or(usize::MAX);
        if count > MARGINAL_PRODUCT_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "{count} legacy marginal products at g = {g} exceed the limit"
            )));
        }
        for flat in 0..count {
            let mut rest = flat;
            let mut poly = Polynomial::one();
            let mut prob = 1.0;
            for copy in 0..g {
                let c = rest % t;
                rest /= t;
                poly = alphabet.mul(&poly, &embedded[copy][c]);
                prob *= cells[c].probability;
            }
            bundle.equalities.push((poly, prob));
        }
    }
    Ok(())
}

fn check_normalized(cells: &[TargetCell]) -> Result<()> {
    let mut sums: std::collections::BTreeMap<&[usize], f64> = std::collections::BTreeMap::new();
    for c in cells {
        if !c.probability.is_finite() || c.probability < -crate::scenario::NORMALIZATION_TOL {
            return Err(Error::Distribution(format!("invalid probability {}", c.probability)));
        }
        *sums.entry(c.settings.as_slice()).or_default() += c.probability;
    }
    for (s, total) in sums {
        if (total - 1.0).abs() > crate::scenario::NORMALIZATION_TOL {
            return Err(Error::Distribution(format!(
                "probabilities for settings {s:?} sum to {total}"
            )));
        }
    }
    Ok(())
}
