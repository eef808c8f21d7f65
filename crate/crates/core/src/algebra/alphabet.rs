use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::word::{LetterId, Polynomial, Word};
use crate::error::{Error, Result};
use crate::scenario::NetworkScenario;

pub type Copies = SmallVec<[u8; 4]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AlgebraMode {
    RankConstrained,
    LegacyProjective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Profile {
    pub hermitian_generators: bool,
    pub mode: AlgebraMode,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            hermitian_generators: true,
            mode: AlgebraMode::RankConstrained,
        }
    }
}

/// A generator symbol. Field order is the total letter order.
///
/// In legacy projective mode `slot` is 0, `copies` lists one copy index per
/// party slot, `outcome` ranges over 1..=M and `schmidt` is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub party: u16,
    pub slot: u16,
    pub copies: Copies,
    pub setting: u32,
    pub outcome: u16,
    pub schmidt: u16,
    pub starred: bool,
}

/// Interned generators of an inflated network scenario, with their
/// commutation table. Letter ids follow the letter order.
#[derive(Clone, Debug)]
pub struct Alphabet {
    net: NetworkScenario,
    n: usize,
    r: usize,
    profile: Profile,
    letters: Vec<Letter>,
    lookup: HashMap<Letter, LetterId>,
    star: Vec<LetterId>,
    commute: Vec<u64>,
    row_words: usize,
    sources: Vec<SmallVec<[u16; 4]>>,
    measurement: Vec<u32>,
}

/// All tuples in {1..n}^arity, lexicographic.
pub fn copy_tuples(n: usize, arity: usize) -> Vec<Copies> {
    let mut out = vec![Copies::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 1..=n {
                let mut u = t.clone();
                u.push(i as u8);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

fn all_differ(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x != y)
}

/// Builds the generator alphabet at inflation level `n` and Schmidt rank `r`.
pub fn build_generators(
    net: &NetworkScenario,
    n: usize,
    r: usize,
    profile: Profile,
) -> Result<Alphabet> {
    Alphabet::new(net, n, r, profile)
}

impl Alphabet {
    pub fn new(net: &NetworkScenario, n: usize, r: usize, mut profile: Profile) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("inflation level n must be >= 1".into()));
        }
        if r < 1 {
            return Err(Error::InvalidParameter("Schmidt rank r must be >= 1".into()));
        }
        if n > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("inflation level {n} too large")));
        }
        if let Some(p) = net.parties.iter().find(|p| p.outcomes < 2) {
            return Err(Error::InvalidParameter(format!(
                "party `{}` needs at least 2 outcomes",
                p.id
            )));
        }
        let legacy = profile.mode == AlgebraMode::LegacyProjective;
        if legacy {
            // Projective generators are self-adjoint by definition.
            profile.hermitian_generators = true;
            if !net.groups.is_empty() || net.parties.iter().any(|p| p.slots.iter().any(|s| s.arity() != 1)) {
                return Err(Error::Unsupported(
                    "legacy projective mode does not support endogenous groups".into(),
                ));
            }
        }
        let stars: &[bool] = if profile.hermitian_generators {
            &[false]
        } else {
            &[false, true]
        };
        let mut letters = Vec::new();
        for (pi, party) in net.parties.iter().enumerate() {
            let settings = net.setting_count(pi) as u32;
            if legacy {
                for copies in copy_tuples(n, party.slots.len()) {
                    for x in 0..settings {
                        for a in 1..=party.outcomes as u16 {
                            letters.push(Letter {
                                party: pi as u16,
                                slot: 0,
                                copies: copies.clone(),
                                setting: x,
                                outcome: a,
                                schmidt: 1,
                                starred: false,
                            });
                        }
                    }
                }
                continue;
            }
            let r_eff = if party.slots.len() > 1 { r } else { 1 };
            for (si, slot) in party.slots.iter().enumerate() {
                for copies in copy_tuples(n, slot.arity()) {
                    for x in 0..settings {
                        for a in 1..party.outcomes as u16 {
                            for alpha in 1..=r_eff as u16 {
                                for &starred in stars {
                                    letters.push(Letter {
                                        party: pi as u16,
                                        slot: si as u16,
                                        copies: copies.clone(),
                                        setting: x,
                                        outcome: a,
                                        schmidt: alpha,
                                        starred,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        letters.sort();
        if letters.len() > LetterId::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "alphabet of {} letters is too large",
                letters.len()
            )));
        }
        let lookup: HashMap<Letter, LetterId> = letters
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as LetterId))
            .collect();
        let star = letters
            .iter()
            .enumerate()
            .map(|(i, l)| {
                if profile.hermitian_generators {
                    i as LetterId
                } else {
                    let mut s = l.clone();
                    s.starred = !s.starred;
                    lookup[&s]
                }
            })
            .collect();
        let sources = letters
            .iter()
            .map(|l| {
                let party = &net.parties[l.party as usize];
                if legacy {
                    party.slots.iter().map(|s| s.sources[0] as u16).collect()
                } else {
                    party.slots[l.slot as usize]
                        .sources
                        .iter()
                        .map(|&s| s as u16)
                        .collect()
                }
            })
            .collect();
        let mut meas_ids: HashMap<(u16, Copies, u32), u32> = HashMap::new();
        let measurement = letters
            .iter()
            .map(|l| {
                let next = meas_ids.len() as u32;
                *meas_ids
                    .entry((l.party, l.copies.clone(), l.setting))
                    .or_insert(next)
            })
            .collect();
        let mut alphabet = Alphabet {
            net: net.clone(),
            n,
            r,
            profile,
            letters,
            lookup,
            star,
            commute: Vec::new(),
            row_words: 0,
            sources,
            measurement,
        };
        alphabet.build_commutation();
        Ok(alphabet)
    }

    fn build_commutation(&mut self) {
        let len = self.letters.len();
        let row_words = len.div_ceil(64).max(1);
        let mut table = vec![0u64; len * row_words];
        let controls: Vec<Option<(usize, usize, SmallVec<[usize; 2]>)>> = self
            .letters
            .iter()
            .map(|l| {
                if self.profile.mode == AlgebraMode::LegacyProjective {
                    return None;
                }
                self.net
                    .member_of(l.party as usize, l.slot as usize)
                    .map(|(g, k)| {
                        let member = &self.net.groups[g].members[k];
                        let values = self.net.decode_setting(l.party as usize, l.setting as usize);
                        (g, k, member.controlling.iter().map(|&pos| values[pos]).collect())
                    })
            })
            .collect();
        for i in 0..len {
            for j in i..len {
                let c = self.letters_commute_with(&self.letters[i], &self.letters[j], &controls[i], &controls[j]);
                if c {
                    table[i * row_words + j / 64] |= 1 << (j % 64);
                    table[j * row_words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        self.commute = table;
        self.row_words = row_words;
    }

    fn letters_commute_with(
        &self,
        x: &Letter,
        y: &Letter,
        cx: &Option<(usize, usize, SmallVec<[usize; 2]>)>,
        cy: &Option<(usize, usize, SmallVec<[usize; 2]>)>,
    ) -> bool {
        if self.profile.mode == AlgebraMode::LegacyProjective {
            return x.party != y.party || all_differ(&x.copies, &y.copies);
        }
        if x.party == y.party && x.slot == y.slot {
            return all_differ(&x.copies, &y.copies);
        }
        if let (Some((gx, mx, sx)), Some((gy, my, sy))) = (cx, cy) {
            if gx == gy && mx != my {
                if x.copies == y.copies {
                    return sx == sy;
                }
                return all_differ(&x.copies, &y.copies);
            }
        }
        true
    }

    /// Commutation predicate on letters of this alphabet; star flags are ignored.
    pub fn commutes(&self, x: &Letter, y: &Letter) -> bool {
        let strip = |l: &Letter| {
            let mut l = l.clone();
            if self.profile.hermitian_generators {
                l.starred = false;
            }
            l
        };
        match (self.lookup.get(&strip(x)), self.lookup.get(&strip(y))) {
            (Some(&a), Some(&b)) => self.commutes_id(a, b),
            _ => false,
        }
    }

    #[inline]
    pub fn commutes_id(&self, a: LetterId, b: LetterId) -> bool {
        let (a, b) = (a as usize, b as usize);
        (self.commute[a * self.row_words + b / 64] >> (b % 64)) & 1 == 1
    }

    pub fn network(&self) -> &NetworkScenario {
        &self.net
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn mode(&self) -> AlgebraMode {
        self.profile.mode
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Identity plus every unstarred generator.
    pub fn generator_count(&self) -> usize {
        1 + self.letters.iter().filter(|l| !l.starred).count()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn letter(&self, id: LetterId) -> &Letter {
        &self.letters[id as usize]
    }

    pub fn id_of(&self, l: &Letter) -> Option<LetterId> {
        self.lookup.get(l).copied()
    }

    pub fn star(&self, id: LetterId) -> LetterId {
        self.star[id as usize]
    }

    /// Latent source attached to each copy position of a letter.
    pub fn letter_sources(&self, id: LetterId) -> &[u16] {
        &self.sources[id as usize]
    }

    /// Same letter with replaced copy indices.
    pub fn with_copies(&self, id: LetterId, copies: &[u8]) -> Option<LetterId> {
        let mut l = self.letters[id as usize].clone();
        l.copies = Copies::from_slice(copies);
        self.lookup.get(&l).copied()
    }

    pub fn effective_rank(&self, party: usize) -> usize {
        if self.profile.mode == AlgebraMode::LegacyProjective || self.net.parties[party].slots.len() < 2 {
            1
        } else {
            self.r
        }
    }

    /// Total copy-tuple arity of a party (sum over its slots).
    pub fn party_arity(&self, party: usize) -> usize {
        self.net.parties[party].slots.iter().map(|s| s.arity()).sum()
    }

    /// Every flattened copy tuple of a party.
    pub fn party_tuples(&self, party: usize) -> Vec<Copies> {
        copy_tuples(self.n, self.party_arity(party))
    }

    /// Lexicographically least word in the trace class of `w`: repeatedly
    /// extract the smallest letter that commutes with everything before it.
    pub fn canonicalize(&self, w: &[LetterId]) -> Word {
        let mut rest: SmallVec<[LetterId; 16]> = SmallVec::from_slice(w);
        let mut out = SmallVec::with_capacity(w.len());
        while !rest.is_empty() {
            let mut best = 0usize;
            for p in 1..rest.len() {
                let c = rest[p];
                if c < rest[best] && rest[..p].iter().all(|&q| self.commutes_id(q, c)) {
                    best = p;
                }
            }
            out.push(rest.remove(best));
        }
        Word(out)
    }

    /// Canonical form modulo all word-level relations; `None` is the zero element
    /// (orthogonal projectors in legacy mode).
    pub fn normalize(&self, w: &[LetterId]) -> Option<Word> {
        let mut cur = self.canonicalize(w);
        if self.profile.mode != AlgebraMode::LegacyProjective {
            return Some(cur);
        }
        loop {
            match self.legacy_reduction(&cur) {
                None => return Some(cur),
                Some(None) => return None,
                Some(Some(next)) => cur = self.canonicalize(&next),
            }
        }
    }

    /// Finds two occurrences of one measurement that can be made adjacent and
    /// returns the reduced word (`Some(None)` for zero).
    fn legacy_reduction(&self, w: &Word) -> Option<Option<SmallVec<[LetterId; 16]>>> {
        let v = w.letters();
        for q in 1..v.len() {
            for p in (0..q).rev() {
                if self.measurement[v[p] as usize] != self.measurement[v[q] as usize] {
                    continue;
                }
                let between = p + 1..q;
                let mut from_p = vec![false; v.len()];
                let mut chain = vec![v[p]];
                for t in between.clone() {
                    if chain.iter().any(|&c| !self.commutes_id(c, v[t])) {
                        from_p[t] = true;
                        chain.push(v[t]);
                    }
                }
                let mut to_q = vec![false; v.len()];
                let mut chain = vec![v[q]];
                for t in between.clone().rev() {
                    if chain.iter().any(|&c| !self.commutes_id(c, v[t])) {
                        to_q[t] = true;
                        chain.push(v[t]);
                    }
                }
                if between.clone().any(|t| from_p[t] && to_q[t]) {
                    continue;
                }
                if v[p] != v[q] {
                    return Some(None);
                }
                let mut out: SmallVec<[LetterId; 16]> = SmallVec::new();
                out.extend_from_slice(&v[..p]);
                out.extend(between.clone().filter(|&t| !from_p[t]).map(|t| v[t]));
                out.push(v[p]);
                out.extend(between.filter(|&t| from_p[t]).map(|t| v[t]));
                out.extend_from_slice(&v[q + 1..]);
                return Some(Some(out));
            }
        }
        None
    }

    /// Reversed word with every letter starred, normalized.
    pub fn word_adjoint(&self, w: &Word) -> Option<Word> {
        let rev: SmallVec<[LetterId; 16]> = w.letters().iter().rev().map(|&l| self.star(l)).collect();
        self.normalize(&rev)
    }

    /// Normalized product `b_i* · b_j`.
    pub fn sandwich(&self, left: &Word, middle: &Word, right: &Word) -> Option<Word> {
        let mut v: SmallVec<[LetterId; 16]> = SmallVec::with_capacity(left.len() + middle.len() + right.len());
        v.extend(left.letters().iter().rev().map(|&l| self.star(l)));
        v.extend_from_slice(middle.letters());
        v.extend_from_slice(right.letters());
        self.normalize(&v)
    }

    pub fn letter_poly(&self, id: LetterId) -> Polynomial {
        Polynomial::term(Word::from_slice(&[id]), Complex64::new(1.0, 0.0))
    }

    pub fn word_poly(&self, w: &[LetterId]) -> Polynomial {
        match self.normalize(w) {
            Some(c) => Polynomial::term(c, Complex64::new(1.0, 0.0)),
            None => Polynomial::zero(),
        }
    }

    pub fn mul(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (wa, ca) in a.terms() {
            for (wb, cb) in b.terms() {
                if let Some(w) = self.normalize(&wa.concat(wb).0) {
                    out.add_term(w, ca * cb);
                }
            }
        }
        out
    }

    /// Anti-linear involution: reverse words, star letters, conjugate coefficients.
    pub fn involution(&self, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (w, c) in p.terms() {
            if let Some(a) = self.word_adjoint(w) {
                out.add_term(a, c.conj());
            }
        }
        out
    }

    pub fn is_self_adjoint(&self, p: &Polynomial, tol: f64) -> bool {
        self.involution(p).max_abs_diff(p) <= tol
    }

    /// Letter for explicit indices (unstarred), if it exists.
    pub fn find(&self, party: usize, slot: usize, copies: &[u8], setting: usize, outcome: usize, schmidt: usize) -> Option<LetterId> {
        self.id_of(&Letter {
            party: party as u16,
            slot: slot as u16,
            copies: Copies::from_slice(copies),
            setting: setting as u32,
            outcome: outcome as u16,
            schmidt: schmidt as u16,
            starred: false,
        })
    }

    /// POVM element of `party` for `outcome` (1-based) at a flattened copy tuple.
    /// Rank-constrained: Σ_α Π_slots e_slot(a, α), with the last outcome given by
    /// completion. In the non-hermitian profile the Hermitian part is returned.
    pub fn povm_element(&self, party: usize, outcome: usize, copies: &[u8], setting: usize) -> Result<Polynomial> {
        let net = &self.net;
        let p = net
            .parties
            .get(party)
            .ok_or_else(|| Error::OutOfRange(format!("party {party}")))?;
        if outcome < 1 || outcome > p.outcomes {
            return Err(Error::OutOfRange(format!(
                "outcome {outcome} of party `{}` (M = {})",
                p.id, p.outcomes
            )));
        }
        if setting >= net.setting_count(party) {
            return Err(Error::OutOfRange(format!("setting {setting} of party `{}`", p.id)));
        }
        if copies.len() != self.party_arity(party) || copies.iter().any(|&c| c < 1 || c as usize > self.n) {
            return Err(Error::OutOfRange(format!("copy tuple {copies:?} for party `{}`", p.id)));
        }
        if self.profile.mode == AlgebraMode::LegacyProjective {
            let id = self
                .find(party, 0, copies, setting, outcome, 1)
                .ok_or_else(|| Error::OutOfRange("legacy letter".into()))?;
            return Ok(self.letter_poly(id));
        }
        if outcome == p.outcomes {
            let mut out = Polynomial::one();
            for a in 1..p.outcomes {
                out.sub(&self.povm_element(party, a, copies, setting)?);
            }
            return Ok(out);
        }
        let mut out = Polynomial::zero();
        for alpha in 1..=self.effective_rank(party) {
            let mut ids: SmallVec<[LetterId; 4]> = SmallVec::new();
            let mut offset = 0;
            for (si, slot) in p.slots.iter().enumerate() {
                let c = &copies[offset..offset + slot.arity()];
                offset += slot.arity();
                ids.push(
                    self.find(party, si, c, setting, outcome, alpha)
                        .ok_or_else(|| Error::OutOfRange("generator".into()))?,
                );
            }
            if let Some(w) = self.normalize(&ids) {
                out.add_term(w, Complex64::new(1.0, 0.0));
            }
        }
        if !self.profile.hermitian_generators {
            let adj = self.involution(&out);
            out.add(&adj);
            out = out.scaled(Complex64::new(0.5, 0.0));
        }
        Ok(out)
    }

    pub fn letter_label(&self, id: LetterId) -> String {
        let l = &self.letters[id as usize];
        let party = &self.net.parties[l.party as usize];
        let mut s = party.id.clone();
        if self.profile.mode == AlgebraMode::RankConstrained {
            let _ = write!(s, ".{}", l.slot);
        }
        s.push('^');
        let copies: Vec<String> = l.copies.iter().map(|c| c.to_string()).collect();
        s.push_str(&copies.join(","));
        if !party.settings.is_empty() {
            let _ = write!(s, "|{}", l.setting);
        }
        if self.profile.mode == AlgebraMode::RankConstrained {
            let _ = write!(s, "({},{})", l.outcome, l.schmidt);
        } else {
            let _ = write!(s, "({})", l.outcome);
        }
        if l.starred {
            s.push('*');
        }
        s
    }

    pub fn word_label(&self, w: &Word) -> String {
        if w.is_identity() {
            return "1".into();
        }
        w.letters()
            .iter()
            .map(|&l| self.letter_label(l))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a whitespace-separated letter list in `letter_label` syntax
    /// (`1` or an empty string is the identity) and normalizes it.
    pub fn parse_word(&self, text: &str) -> Result<Option<Word>> {
        let mut ids = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            ids.push(self.parse_letter(tok)?);
        }
        Ok(self.normalize(&ids))
    }

    fn parse_letter(&self, tok: &str) -> Result<LetterId> {
        let bad = || Error::InvalidParameter(format!("cannot parse letter `{tok}`"));
        let (body, starred) = match tok.strip_suffix('*') {
            Some(b) => (b, true),
            None => (tok, false),
        };
        let (head, tail) = body.split_once('^').ok_or_else(bad)?;
        let (party_id, slot) = if self.profile.mode == AlgebraMode::RankConstrained {
            let (p, s) = head.rsplit_once('.').ok_or_else(bad)?;
            (p, s.parse::<u16>().map_err(|_| bad())?)
        } else {
            (head, 0)
        };
        let party = self.net.party_index(party_id).ok_or_else(|| Error::UnknownNode(party_id.into()))?;
        let (idx, rest) = tail.split_once('(').ok_or_else(bad)?;
        let (copies_txt, setting) = match idx.split_once('|') {
            Some((c, x)) => (c, x.parse::<u32>().map_err(|_| bad())?),
            None => (idx, 0),
        };
        let copies: Copies = copies_txt
            .split(',')
            .map(|c| c.parse::<u8>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let inner = rest.strip_suffix(')').ok_or_else(bad)?;
        let nums: Vec<u16> = inner
            .split(',')
            .map(|c| c.parse::<u16>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (outcome, schmidt) = match nums.as_slice() {
            [a] => (*a, 1),
            [a, b] => (*a, *b),
            _ => return Err(bad()),
        };
        let letter = Letter {
            party: party as u16,
            slot,
            copies,
            setting,
            outcome,
            schmidt,
            starred: starred && !self.profile.hermitian_generators,
        };
        self.id_of(&letter)
            .ok_or_else(|| Error::OutOfRange(format!("letter `{tok}` is not in the alphabet")))
    }
}
