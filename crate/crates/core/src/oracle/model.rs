use std::collections::BTreeMap;
use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::linalg::{c, embed, identity, kron_all, max_abs_diff, min_eigenvalue, op_norm, trace_product, CMatrix};
use crate::algebra::{AlgebraMode, Alphabet, Letter, Word};
use crate::error::{Error, Result};
use crate::scenario::{Distribution, NetworkScenario, TargetCell};

/// Largest total Hilbert-space dimension handled densely.
pub const MAX_DENSE_DIM: usize = 256;

/// Dense complex matrix; JSON form `{rows, cols, data: [[re, im], …]}` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(pub CMatrix);

impl Deref for Operator {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

impl DerefMut for Operator {
    fn deref_mut(&mut self) -> &mut CMatrix {
        &mut self.0
    }
}

impl From<CMatrix> for Operator {
    fn from(m: CMatrix) -> Self {
        Operator(m)
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = &self.0;
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        OperatorRepr {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = OperatorRepr::deserialize(d)?;
        if r.data.len() != r.rows * r.cols {
            return Err(serde::de::Error::custom(format!(
                "matrix data has {} entries, expected {}",
                r.data.len(),
                r.rows * r.cols
            )));
        }
        let vals: Vec<Complex64> = r.data.iter().map(|p| c(p[0], p[1])).collect();
        Ok(Operator(CMatrix::from_row_slice(r.rows, r.cols, &vals)))
    }
}

/// State of one latent source on the tensor product of its endpoint factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceState {
    /// Parties fed by the source, in party order; one Hilbert factor each.
    pub endpoints: Vec<usize>,
    pub dims: Vec<usize>,
    pub state: Operator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyMeasurement {
    /// `povm[x][a]` on the party's local space (slot factors in slot order).
    pub povm: Vec<Vec<Operator>>,
    /// `factors[x][a][α][slot]` for the first M − 1 outcomes:
    /// E_a = Σ_α ⊗_slot factor. Missing for POVMs given only as matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<Vec<Vec<Operator>>>>>,
}

/// Explicit quantum model of a network scenario without endogenous groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FiniteModel {
    pub network: NetworkScenario,
    /// Number of Schmidt terms per factorized POVM element.
    pub r: usize,
    /// Largest factor operator norm.
    pub c_bound: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    pub sources: Vec<SourceState>,
    pub measurements: Vec<PartyMeasurement>,
}

const TOL: f64 = 1e-9;

impl FiniteModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: FiniteModel = serde_json::from_str(text).map_err(Error::from_json)?;
        m.validate()?;
        Ok(m)
    }

    /// Endpoint factor of `party` on `source`.
    pub fn endpoint_index(&self, source: usize, party: usize) -> Option<usize> {
        self.sources[source].endpoints.iter().position(|&p| p == party)
    }

    /// Dimension of the factor a party slot acts on.
    pub fn slot_dim(&self, party: usize, slot: usize) -> usize {
        let s = self.network.parties[party].slots[slot].sources[0];
        let e = self.endpoint_index(s, party).expect("validated endpoint");
        self.sources[s].dims[e]
    }

    pub fn local_dims(&self, party: usize) -> Vec<usize> {
        (0..self.network.parties[party].slots.len())
            .map(|s| self.slot_dim(party, s))
            .collect()
    }

    /// Factor dimensions of the full space, source-major.
    pub fn full_dims(&self) -> Vec<usize> {
        self.sources.iter().flat_map(|s| s.dims.iter().copied()).collect()
    }

    /// Index of (source, endpoint) among `full_dims`.
    pub fn factor_index(&self, source: usize, endpoint: usize) -> usize {
        self.sources[..source].iter().map(|s| s.dims.len()).sum::<usize>() + endpoint
    }

    fn party_factors(&self, party: usize) -> Vec<usize> {
        self.network.parties[party]
            .slots
            .iter()
            .map(|slot| {
                let s = slot.sources[0];
                self.factor_index(s, self.endpoint_index(s, party).expect("validated endpoint"))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let net = &self.network;
        if !net.groups.is_empty()
            || net
                .parties
                .iter()
                .any(|p| p.slots.iter().any(|s| s.arity() != 1))
        {
            return Err(Error::Unsupported(
                "explicit models of endogenous groups are not supported".into(),
            ));
        }
        if self.r < 1 {
            return Err(Error::InvalidParameter("model rank must be >= 1".into()));
        }
        if self.sources.len() != net.sources.len() || self.measurements.len() != net.parties.len() {
            return Err(Error::Dimension("model does not match the network".into()));
        }
        for (si, src) in self.sources.iter().enumerate() {
            let expected: Vec<usize> = (0..net.parties.len())
                .filter(|&p| net.parties[p].slots.iter().any(|s| s.sources[0] == si))
                .collect();
            if src.endpoints != expected || src.dims.len() != expected.len() || src.dims.contains(&0) {
                return Err(Error::Dimension(format!(
                    "source `{}` endpoints do not match the network",
                    net.sources[si]
                )));
            }
            let d: usize = src.dims.iter().product();
            if src.state.nrows() != d || src.state.ncols() != d {
                return Err(Error::Dimension(format!("state of source `{}`", net.sources[si])));
            }
            let tr = src.state.trace();
            if (tr - c(1.0, 0.0)).norm() > TOL
                || max_abs_diff(&src.state, &src.state.adjoint()) > TOL
                || min_eigenvalue(&src.state) < -TOL
            {
                return Err(Error::InvalidParameter(format!(
                    "state of source `{}` is not a density matrix",
                    net.sources[si]
                )));
            }
        }
        for (pi, party) in net.parties.iter().enumerate() {
            let meas = &self.measurements[pi];
            let dims = self.local_dims(pi);
            let d: usize = dims.iter().product();
            let settings = net.setting_count(pi);
            if meas.povm.len() != settings {
                return Err(Error::Dimension(format!("settings of party `{}`", party.id)));
            }
            for (x, elems) in meas.povm.iter().enumerate() {
                if elems.len() != party.outcomes {
                    return Err(Error::Dimension(format!("outcomes of party `{}`", party.id)));
                }
                let mut sum = CMatrix::zeros(d, d);
                for e in elems {
                    if e.nrows() != d || e.ncols() != d {
                        return Err(Error::Dimension(format!("POVM of party `{}`", party.id)));
                    }
                    if max_abs_diff(e, &e.adjoint()) > TOL || min_eigenvalue(e) < -TOL {
                        return Err(Error::InvalidParameter(format!(
                            "POVM element of party `{}` (setting {x}) is not positive",
                            party.id
                        )));
                    }
                    sum += &e.0;
                }
                if max_abs_diff(&sum, &identity(d)) > TOL {
                    return Err(Error::InvalidParameter(format!(
                        "POVM of party `{}` (setting {x}) does not sum to the identity",
                        party.id
                    )));
                }
            }
            if let Some(f) = &meas.factors {
                self.check_factors(pi, f, &dims)?;
            }
        }
        Ok(())
    }

    fn check_factors(&self, pi: usize, f: &[Vec<Vec<Vec<Operator>>>], dims: &[usize]) -> Result<()> {
        let party = &self.network.parties[pi];
        let bad = |what: &str| Error::InvalidParameter(format!("{what} of party `{}`", party.id));
        if f.len() != self.measurements[pi].povm.len() {
            return Err(bad("factor settings"));
        }
        for (x, per_a) in f.iter().enumerate() {
            if per_a.len() != party.outcomes - 1 {
                return Err(bad("factor outcomes"));
            }
            for (a, terms) in per_a.iter().enumerate() {
                if terms.is_empty() || (party.slots.len() == 1 && terms.len() != 1) {
                    return Err(bad("Schmidt term count"));
                }
                let d: usize = dims.iter().product();
                let mut sum = CMatrix::zeros(d, d);
                for term in terms {
                    if term.len() != dims.len()
                        || term.iter().zip(dims).any(|(m, &dd)| m.nrows() != dd || m.ncols() != dd)
                    {
                        return Err(bad("factor shape"));
                    }
                    if term.iter().any(|m| op_norm(m) > self.c_bound + 1e-12) {
                        return Err(bad("factor norm bound"));
                    }
                    sum += kron_all(term.iter().map(|m| &m.0));
                }
                if max_abs_diff(&sum, &self.measurements[pi].povm[x][a]) > TOL {
                    return Err(bad("Schmidt decomposition"));
                }
            }
        }
        Ok(())
    }

    /// Operator of a rank-constrained letter on its slot factor; letters
    /// beyond the model's Schmidt terms are zero.
    fn letter_operator(&self, l: &Letter) -> Result<CMatrix> {
        let p = l.party as usize;
        let meas = &self.measurements[p];
        let f = meas.factors.as_ref().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "party `{}` has no Schmidt factors",
                self.network.parties[p].id
            ))
        })?;
        let terms = &f[l.setting as usize][l.outcome as usize - 1];
        let d = self.slot_dim(p, l.slot as usize);
        let m = match terms.get(l.schmidt as usize - 1) {
            Some(t) => t[l.slot as usize].0.clone(),
            None => CMatrix::zeros(d, d),
        };
        Ok(if l.starred { m.adjoint() } else { m })
    }

    fn check_alphabet(&self, alphabet: &Alphabet) -> Result<()> {
        if alphabet.network() != &self.network {
            return Err(Error::Dimension("alphabet and model networks differ".into()));
        }
        Ok(())
    }

    pub fn full_state(&self) -> CMatrix {
        kron_all(self.sources.iter().map(|s| &s.state.0))
    }

    /// ρ(w) = tr(state · Π letters) by dense algebra on the full space
    /// (inflation level 1 only).
    pub fn eval_moments(&self, alphabet: &Alphabet, words: &[Word]) -> Result<Vec<Complex64>> {
        self.check_alphabet(alphabet)?;
        if alphabet.n() != 1 {
            return Err(Error::Dimension(
                "dense evaluation needs inflation level 1; use product_extension".into(),
            ));
        }
        let dims = self.full_dims();
        let total: usize = dims.iter().product();
        if total > MAX_DENSE_DIM {
            return Err(Error::Dimension(format!(
                "total dimension {total} exceeds {MAX_DENSE_DIM}"
            )));
        }
        let mut ops: BTreeMap<u16, CMatrix> = BTreeMap::new();
        for w in words {
            for &id in w.letters() {
                if ops.contains_key(&id) {
                    continue;
                }
                let l = alphabet.letter(id);
                let (m, factors) = match alphabet.mode() {
                    AlgebraMode::RankConstrained => {
                        let slot = l.slot as usize;
                        let s = self.network.parties[l.party as usize].slots[slot].sources[0];
                        let e = self.endpoint_index(s, l.party as usize).expect("validated");
                        (self.letter_operator(l)?, vec![self.factor_index(s, e)])
                    }
                    AlgebraMode::LegacyProjective => (
                        self.measurements[l.party as usize].povm[l.setting as usize]
                            [l.outcome as usize - 1]
                            .0
                            .clone(),
                        self.party_factors(l.party as usize),
                    ),
                };
                ops.insert(id, embed(&m, &factors, &dims));
            }
        }
        let state = self.full_state();
        Ok(words
            .iter()
            .map(|w| {
                let mut prod = identity(total);
                for id in w.letters() {
                    prod = prod * &ops[id];
                }
                trace_product(&state, &prod)
            })
            .collect())
    }

    /// Moments of inflated words against the n-fold product of every source
    /// state, one independent copy per inflation index.
    pub fn product_extension(&self, alphabet: &Alphabet, words: &[Word]) -> Result<Vec<Complex64>> {
        self.check_alphabet(alphabet)?;
        if alphabet.mode() != AlgebraMode::RankConstrained {
            if alphabet.n() == 1 {
                return self.eval_moments(alphabet, words);
            }
            return Err(Error::Unsupported(
                "product extension of legacy projective words".into(),
            ));
        }
        let mut cache: BTreeMap<u16, CMatrix> = BTreeMap::new();
        for id in 0..alphabet.len() as u16 {
            cache.insert(id, self.letter_operator(alphabet.letter(id))?);
        }
        let mut out = Vec::with_capacity(words.len());
        for w in words {
            // (source, copy) -> per-endpoint ordered products.
            let mut acc: BTreeMap<(usize, u8), Vec<Option<CMatrix>>> = BTreeMap::new();
            for &id in w.letters() {
                let l = alphabet.letter(id);
                let p = l.party as usize;
                let s = self.network.parties[p].slots[l.slot as usize].sources[0];
                let e = self.endpoint_index(s, p).expect("validated");
                let slot = acc
                    .entry((s, l.copies[0]))
                    .or_insert_with(|| vec![None; self.sources[s].dims.len()]);
                slot[e] = Some(match slot[e].take() {
                    None => cache[&id].clone(),
                    Some(m) => m * &cache[&id],
                });
            }
            let mut value = c(1.0, 0.0);
            for ((s, _), ends) in acc {
                let src = &self.sources[s];
                let factors: Vec<CMatrix> = ends
                    .into_iter()
                    .zip(&src.dims)
                    .map(|(m, &d)| m.unwrap_or_else(|| identity(d)))
                    .collect();
                value *= trace_product(&src.state, &kron_all(&factors));
            }
            out.push(value);
        }
        Ok(out)
    }

    /// P(a | x) for every outcome and setting combination, as network cells.
    pub fn cells(&self) -> Result<Vec<TargetCell>> {
        let net = &self.network;
        let dims = self.full_dims();
        let total: usize = dims.iter().product();
        if total > MAX_DENSE_DIM {
            return Err(Error::Dimension(format!(
                "total dimension {total} exceeds {MAX_DENSE_DIM}"
            )));
        }
        let state = self.full_state();
        let factors: Vec<Vec<usize>> = (0..net.parties.len()).map(|p| self.party_factors(p)).collect();
        let setting_cards: Vec<usize> = net.settings.iter().map(|s| s.cardinality).collect();
        let outcome_cards: Vec<usize> = net.parties.iter().map(|p| p.outcomes).collect();
        let n_set: usize = setting_cards.iter().product();
        let n_out: usize = outcome_cards.iter().product();
        let mut cells = Vec::with_capacity(n_set * n_out);
        for xs in 0..n_set {
            let settings = digits(&setting_cards, xs);
            // Embedded POVM elements per party for this setting combination.
            let embedded: Vec<Vec<CMatrix>> = net
                .parties
                .iter()
                .enumerate()
                .map(|(p, party)| {
                    let vals: Vec<usize> = party.settings.iter().map(|&x| settings[x]).collect();
                    let x = net.encode_setting(p, &vals);
                    self.measurements[p].povm[x]
                        .iter()
                        .map(|e| embed(e, &factors[p], &dims))
                        .collect()
                })
                .collect();
            for o in 0..n_out {
                let outcomes = digits(&outcome_cards, o);
                let mut prod = state.clone();
                for (p, &a) in outcomes.iter().enumerate() {
                    prod = prod * &embedded[p][a];
                }
                cells.push(TargetCell {
                    outcomes,
                    settings: settings.clone(),
                    probability: prod.trace().re,
                });
            }
        }
        Ok(cells)
    }

    /// Joint distribution over parties then settings, settings uniform.
    pub fn distribution(&self) -> Result<Distribution> {
        let net = &self.network;
        let cells = self.cells()?;
        let mut variables: Vec<String> = net.parties.iter().map(|p| p.id.clone()).collect();
        variables.extend(net.settings.iter().map(|s| s.id.clone()));
        let mut cards: Vec<usize> = net.parties.iter().map(|p| p.outcomes).collect();
        cards.extend(net.settings.iter().map(|s| s.cardinality));
        let n_set: usize = net.settings.iter().map(|s| s.cardinality).product();
        let mut table = vec![0.0; cards.iter().product()];
        let mut d = Distribution {
            variables,
            cardinalities: cards,
            table: Vec::new(),
        };
        for cell in &cells {
            let mut vals = cell.outcomes.clone();
            vals.extend(&cell.settings);
            let idx = d.flat_index(&vals);
            table[idx] = cell.probability.max(0.0) / n_set as f64;
        }
        let total: f64 = table.iter().sum();
        for v in &mut table {
            *v /= total;
        }
        d.table = table;
        d.validate()?;
        Ok(d)
    }
}

/// Row-major digits of `flat` (last fastest).
pub(crate) fn digits(cards: &[usize], mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for (k, &c) in cards.iter().enumerate().rev() {
        out[k] = flat % c;
        flat /= c;
    }
    out
}

/// Σ over cells of (p̃ − p)², cells matched by position.
pub fn squared_distance(a: &[TargetCell], b: &[TargetCell]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.probability - y.probability).powi(2))
        .sum()
}
