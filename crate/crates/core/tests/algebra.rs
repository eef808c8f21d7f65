use std::collections::{HashSet, VecDeque};

use num_complex::Complex64;
use proptest::prelude::*;

use qcausal_core::algebra::{build_relations, AlgebraMode, Alphabet, LetterId, Polynomial, Profile, Word};
use qcausal_core::inflation::{PermutationTuple, SymmetryGroup};
use qcausal_core::scenario::{prepare, presets, NetworkScenario};

fn complex_profile() -> Profile {
    Profile {
        hermitian_generators: false,
        mode: AlgebraMode::RankConstrained,
    }
}

fn alphabets() -> Vec<Alphabet> {
    let tri = NetworkScenario::triangle(2);
    let bell = NetworkScenario::bell(2, 2);
    let switched = prepare(&presets::switched_source(2, 2)).unwrap().network;
    let bilocal = prepare(&presets::bilocal(3)).unwrap().network;
    vec![
        Alphabet::new(&tri, 2, 2, Profile::default()).unwrap(),
        Alphabet::new(&tri, 2, 1, complex_profile()).unwrap(),
        Alphabet::new(&bell, 1, 1, complex_profile()).unwrap(),
        Alphabet::new(&switched, 2, 1, Profile::default()).unwrap(),
        Alphabet::new(&bilocal, 2, 2, complex_profile()).unwrap(),
    ]
}

/// Least word reachable by swapping adjacent commuting letters.
fn brute_force_canonical(a: &Alphabet, w: &[LetterId]) -> Vec<LetterId> {
    let mut seen: HashSet<Vec<LetterId>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(w.to_vec());
    queue.push_back(w.to_vec());
    while let Some(cur) = queue.pop_front() {
        for i in 0..cur.len().saturating_sub(1) {
            if cur[i] != cur[i + 1] && a.commutes_id(cur[i], cur[i + 1]) {
                let mut next = cur.clone();
                next.swap(i, i + 1);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen.into_iter().min().unwrap()
}

fn random_tuple(sources: usize, n: usize, seeds: &[u64]) -> PermutationTuple {
    let mut t = PermutationTuple::identity(sources, n);
    for (s, perm) in t.perms.iter_mut().enumerate() {
        let mut x = seeds[s % seeds.len()].wrapping_add(s as u64 * 0x9e37_79b9);
        for i in (1..perm.len()).rev() {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            perm.swap(i, (x % (i as u64 + 1)) as usize);
        }
    }
    t
}

fn word_strategy() -> impl Strategy<Value = (usize, Vec<u16>)> {
    (0usize..5, prop::collection::vec(any::<u16>(), 0..8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn canonicalize_is_idempotent((which, raw) in word_strategy()) {
        let a = &alphabets()[which];
        let w: Vec<LetterId> = raw.iter().map(|&x| x % a.len() as u16).collect();
        let c = a.canonicalize(&w);
        prop_assert_eq!(a.canonicalize(c.letters()), c);
    }

    #[test]
    fn canonical_form_is_least_in_trace_class((which, raw) in word_strategy()) {
        let a = &alphabets()[which];
        let w: Vec<LetterId> = raw.iter().take(6).map(|&x| x % a.len() as u16).collect();
        prop_assert_eq!(a.canonicalize(&w).letters().to_vec(), brute_force_canonical(a, &w));
    }

    #[test]
    fn commuting_swaps_are_confluent((which, raw) in word_strategy(), pos in any::<usize>()) {
        let a = &alphabets()[which];
        let mut w: Vec<LetterId> = raw.iter().map(|&x| x % a.len() as u16).collect();
        if w.len() >= 2 {
            let i = pos % (w.len() - 1);
            if a.commutes_id(w[i], w[i + 1]) {
                let before = a.canonicalize(&w);
                w.swap(i, i + 1);
                prop_assert_eq!(a.canonicalize(&w), before);
            }
        }
    }

    #[test]
    fn involution_is_an_involution((which, raw) in word_strategy(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let a = &alphabets()[which];
        let w: Vec<LetterId> = raw.iter().map(|&x| x % a.len() as u16).collect();
        let mut p = a.word_poly(&w);
        p.add_term(Word::identity(), Complex64::new(re, im));
        let twice = a.involution(&a.involution(&p));
        prop_assert!(twice.max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn orbit_key_is_invariant((which, raw) in word_strategy(), seeds in prop::collection::vec(any::<u64>(), 3)) {
        let a = &alphabets()[which];
        let group = SymmetryGroup::new(a);
        let w = a.canonicalize(&raw.iter().map(|&x| x % a.len() as u16).collect::<Vec<_>>());
        let g = random_tuple(group.source_count(), a.n(), &seeds);
        let moved = group.act(&g, &w).unwrap();
        prop_assert_eq!(group.orbit_canonical(&moved), group.orbit_canonical(&w));
    }

    #[test]
    fn action_is_compatible_with_composition((which, raw) in word_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = &alphabets()[which];
        let group = SymmetryGroup::new(a);
        let w = a.canonicalize(&raw.iter().map(|&x| x % a.len() as u16).collect::<Vec<_>>());
        let g = random_tuple(group.source_count(), a.n(), &[s1]);
        let h = random_tuple(group.source_count(), a.n(), &[s2]);
        let lhs = group.act(&g, &group.act(&h, &w).unwrap()).unwrap();
        prop_assert_eq!(lhs, group.act(&g.compose(&h), &w).unwrap());
    }
}

#[test]
fn commutation_is_symmetric() {
    for a in alphabets() {
        for x in 0..a.len() as LetterId {
            for y in 0..a.len() as LetterId {
                assert_eq!(a.commutes_id(x, y), a.commutes_id(y, x));
            }
        }
    }
}

/// Triangle letters act on (party, slot, copy) subsystems; two letters fail to
/// commute exactly when they share one.
#[test]
fn triangle_commutation_matches_subsystems() {
    let tri = NetworkScenario::triangle(3);
    let a = Alphabet::new(&tri, 3, 2, Profile::default()).unwrap();
    for x in 0..a.len() as LetterId {
        for y in 0..a.len() as LetterId {
            let (lx, ly) = (a.letter(x), a.letter(y));
            let shared = lx.party == ly.party && lx.slot == ly.slot && lx.copies == ly.copies;
            assert_eq!(a.commutes_id(x, y), !shared, "{} {}", a.letter_label(x), a.letter_label(y));
        }
    }
}

#[test]
fn triangle_generator_count_formula() {
    for m in [2usize, 3, 4] {
        let net = NetworkScenario::triangle(m);
        for r in [1usize, 2, 4] {
            for n in [1usize, 2, 3] {
                let a = Alphabet::new(&net, n, r, Profile::default()).unwrap();
                assert_eq!(a.generator_count(), 6 * (m - 1) * r * n + 1, "M={m} r={r} n={n}");
            }
        }
    }
}

#[test]
fn word_labels_round_trip() {
    for a in alphabets() {
        for x in 0..a.len() as LetterId {
            for y in 0..a.len() as LetterId {
                let w = a.canonicalize(&[x, y]);
                let parsed = a.parse_word(&a.word_label(&w)).unwrap().unwrap();
                assert_eq!(parsed, w);
            }
        }
    }
}

#[test]
fn legacy_projectors_are_orthogonal() {
    let net = NetworkScenario::bell(3, 2);
    let profile = Profile {
        hermitian_generators: true,
        mode: AlgebraMode::LegacyProjective,
    };
    let a = Alphabet::new(&net, 1, 1, profile).unwrap();
    let e1 = a.find(0, 0, &[1], 0, 1, 1).unwrap();
    let e2 = a.find(0, 0, &[1], 0, 2, 1).unwrap();
    assert_eq!(a.normalize(&[e1, e1]), Some(Word::from_slice(&[e1])));
    assert_eq!(a.normalize(&[e1, e2]), None);
}

#[test]
fn povm_elements_sum_to_identity() {
    let net = NetworkScenario::triangle(3);
    let a = Alphabet::new(&net, 1, 2, Profile::default()).unwrap();
    for party in 0..3 {
        let mut total = Polynomial::zero();
        for outcome in 1..=3 {
            total.add(&a.povm_element(party, outcome, &[1, 1], 0).unwrap());
        }
        assert!(total.max_abs_diff(&Polynomial::one()) < 1e-15);
    }
}

#[test]
fn relations_carry_the_norm_bound() {
    let net = NetworkScenario::triangle(2);
    let a = Alphabet::new(&net, 1, 2, Profile::default()).unwrap();
    let rel = build_relations(&a, 0.5).unwrap();
    assert!(!rel.norm.is_empty());
    assert!(build_relations(&a, -1.0).is_err());
}
