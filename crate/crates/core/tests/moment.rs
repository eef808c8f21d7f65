use std::collections::{HashMap, HashSet};

use num_complex::Complex64;

use qcausal_core::algebra::{Alphabet, Letter, LetterId, Profile, Word};
use qcausal_core::hierarchy::{CompiledHierarchy, HierarchyConfig};
use qcausal_core::moment::{
    enumerate_basis, polarize, MomentContext, ObjectiveMode, StatePolynomial, StateTerm,
};
use qcausal_core::oracle::{sample_model, squared_distance};
use qcausal_core::scenario::{NetworkScenario, TargetCell};

fn all_permutations(n: u8) -> Vec<Vec<u8>> {
    if n == 1 {
        return vec![vec![1]];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n);
            out.push(q);
        }
    }
    out
}

fn find(parent: &mut Vec<usize>, x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Number of classes of table words under the full product of symmetric
/// groups together with the involution, computed by direct letter relabeling.
pub fn brute_force_orbit_count(a: &Alphabet, words: &[Word]) -> usize {
    let n = a.n() as u8;
    let sources = a.network().sources.len();
    let perms = all_permutations(n);
    let mut elements: Vec<Vec<Vec<u8>>> = vec![vec![]];
    for _ in 0..sources {
        elements = elements
            .into_iter()
            .flat_map(|g| {
                perms.iter().map(move |p| {
                    let mut h = g.clone();
                    h.push(p.clone());
                    h
                })
            })
            .collect();
    }
    let mut index: HashMap<Word, usize> = HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    let id = |w: Word, index: &mut HashMap<Word, usize>, parent: &mut Vec<usize>| {
        *index.entry(w).or_insert_with(|| {
            parent.push(parent.len());
            parent.len() - 1
        })
    };
    for w in words {
        let base = id(w.clone(), &mut index, &mut parent);
        let adj = a.word_adjoint(w).unwrap();
        let j = id(adj, &mut index, &mut parent);
        let (ra, rb) = (find(&mut parent, base), find(&mut parent, j));
        parent[ra] = rb;
        for g in &elements {
            let mapped: Vec<LetterId> = w
                .letters()
                .iter()
                .map(|&l| {
                    let letter = a.letter(l);
                    let sources = a.letter_sources(l);
                    let mut moved: Letter = letter.clone();
                    for (c, &s) in moved.copies.iter_mut().zip(sources) {
                        *c = g[s as usize][*c as usize - 1];
                    }
                    a.id_of(&moved).unwrap()
                })
                .collect();
            let image = a.canonicalize(&mapped);
            let j = id(image, &mut index, &mut parent);
            let (ra, rb) = (find(&mut parent, base), find(&mut parent, j));
            parent[ra] = rb;
        }
    }
    let roots: HashSet<usize> = words
        .iter()
        .map(|w| {
            let i = index[w];
            find(&mut parent, i)
        })
        .collect();
    roots.len()
}

#[test]
fn basis_sizes_match_trace_classes() {
    let net = NetworkScenario::triangle(2);
    let a = Alphabet::new(&net, 1, 1, Profile::default()).unwrap();
    let basis = enumerate_basis(&a, 2);
    let l = a.len() as LetterId;
    let mut pairs: HashSet<Vec<LetterId>> = HashSet::new();
    for x in 0..l {
        for y in 0..l {
            let w = if a.commutes_id(x, y) && y < x { vec![y, x] } else { vec![x, y] };
            pairs.insert(w);
        }
    }
    assert_eq!(basis.cumulative, vec![1, 1 + 6, 1 + 6 + pairs.len()]);
}

#[test]
fn moment_matrix_is_hermitian() {
    let net = NetworkScenario::triangle(2);
    let a = Alphabet::new(&net, 2, 1, Profile::default()).unwrap();
    let basis = enumerate_basis(&a, 2);
    let mut ctx = MomentContext::new(&a);
    let m = ctx.moment_matrix(&basis);
    let table = ctx.table();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            let e = m.entry(table, i, j);
            let f = m.entry(table, j, i);
            assert_eq!(e.len(), f.len());
            for ((we, ce), (wf, cf)) in e.iter().zip(&f) {
                assert_eq!(table.adjoint(*we), *wf);
                assert_eq!(*ce, cf.conj());
            }
        }
    }
}

#[test]
fn symmetry_merge_matches_brute_force_orbits() {
    let net = NetworkScenario::triangle(2);
    for (r, k) in [(1, 1), (2, 1), (1, 2)] {
        let config = HierarchyConfig {
            n: 2,
            k,
            r,
            ..HierarchyConfig::default()
        };
        let h = CompiledHierarchy::compile(&net, None, &config).unwrap();
        assert!(h.stats.group_fully_enumerated);
        assert_eq!(h.stats.group_order, "8");
        let expected = brute_force_orbit_count(&h.alphabet, h.words());
        assert_eq!(h.stats.variables_after_merge, expected, "r={r} k={k}");
        assert!(h.stats.variables_after_merge < h.stats.variables_before_merge);
    }
}

#[test]
fn polarize_moves_factors_to_copies() {
    let net = NetworkScenario::triangle(2);
    let a = Alphabet::new(&net, 2, 1, Profile::default()).unwrap();
    let e = a.povm_element(0, 1, &[1, 1], 0).unwrap();
    let obj = StatePolynomial {
        terms: vec![StateTerm {
            coefficient: 1.0,
            factors: vec![e.clone(), e.clone()],
        }],
    };
    let p = polarize(&a, &obj).unwrap();
    for (w, _) in p.terms() {
        let copies: HashSet<u8> = w.letters().iter().map(|&l| a.letter(l).copies[0]).collect();
        assert_eq!(copies, HashSet::from([1, 2]));
    }
    let one = Alphabet::new(&net, 1, 1, Profile::default()).unwrap();
    let e1 = one.povm_element(0, 1, &[1, 1], 0).unwrap();
    let deg2 = StatePolynomial {
        terms: vec![StateTerm {
            coefficient: 1.0,
            factors: vec![e1.clone(), e1],
        }],
    };
    assert!(polarize(&one, &deg2).is_err());
}

/// ‖P̃ − P‖₂² from the polarized objective on product moments, against the
/// value computed from the model's distribution.
#[test]
fn polarized_objective_equals_squared_distance() {
    let net = NetworkScenario::triangle(2);
    for seed in 0..4u64 {
        let (model, _) = sample_model(&net, 2, 2, seed).unwrap();
        let exact = model.cells().unwrap();
        let target: Vec<TargetCell> = exact
            .iter()
            .enumerate()
            .map(|(i, c)| TargetCell {
                probability: if i == 0 { 0.4 } else { 0.6 / 7.0 },
                ..c.clone()
            })
            .collect();
        let config = HierarchyConfig {
            n: 2,
            k: 1,
            r: 2,
            c_bound: model.c_bound,
            mode: ObjectiveMode::PolarizedObjective,
            ..HierarchyConfig::default()
        };
        let h = CompiledHierarchy::compile(&net, Some(&target), &config).unwrap();
        let values = model.product_extension(&h.alphabet, h.words()).unwrap();
        let x = h.point(&values);
        let value = h.problem.objective_value(&x);
        let direct = squared_distance(&exact, &target);
        assert!((value - direct).abs() < 1e-10, "seed {seed}: {value} vs {direct}");
    }
}

#[test]
fn product_moments_agree_within_orbits() {
    let net = NetworkScenario::triangle(2);
    let (model, _) = sample_model(&net, 2, 1, 7).unwrap();
    let config = HierarchyConfig {
        n: 2,
        k: 2,
        r: 1,
        c_bound: model.c_bound,
        ..HierarchyConfig::default()
    };
    let h = CompiledHierarchy::compile(&net, None, &config).unwrap();
    let values: Vec<Complex64> = model.product_extension(&h.alphabet, h.words()).unwrap();
    assert!(h.variables.max_merge_deviation(&values) < 1e-12);
}
