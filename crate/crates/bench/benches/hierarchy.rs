use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcausal_bench::{correlated_triangle, level, sampled_triangle};
use qcausal_core::algebra::{Alphabet, LetterId, Profile};
use qcausal_core::hierarchy::CompiledHierarchy;
use qcausal_core::inflation::SymmetryGroup;
use qcausal_core::scenario::NetworkScenario;
use qcausal_core::sdp::SolverSettings;

fn words(c: &mut Criterion) {
    let a = Alphabet::new(&NetworkScenario::triangle(2), 2, 2, Profile::default()).unwrap();
    let group = SymmetryGroup::new(&a);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let raw: Vec<Vec<LetterId>> = (0..256)
        .map(|_| (0..6).map(|_| rng.random_range(0..a.len() as LetterId)).collect())
        .collect();
    c.bench_function("canonicalize/256 words", |b| {
        b.iter(|| raw.iter().map(|w| a.canonicalize(black_box(w)).len()).sum::<usize>())
    });
    let canon: Vec<_> = raw.iter().map(|w| a.canonicalize(w)).collect();
    c.bench_function("orbit_canonical/256 words", |b| {
        b.iter(|| canon.iter().map(|w| group.orbit_canonical(black_box(w)).len()).sum::<usize>())
    });
}

fn compile(c: &mut Criterion) {
    let problem = correlated_triangle();
    let mut g = c.benchmark_group("compile");
    g.sample_size(10);
    for (n, k, r) in [(1, 2, 2), (2, 2, 1), (2, 2, 2)] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("n{n}k{k}r{r}")), &(n, k, r), |b, &(n, k, r)| {
            b.iter(|| problem.compile(&level(n, k, r, 1.0)).unwrap())
        });
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    for (n, k, r) in [(1, 2, 1), (2, 1, 2), (2, 2, 1)] {
        let (model, problem) = sampled_triangle(r, 0);
        let h = problem.compile(&level(n, k, r, model.c_bound)).unwrap();
        g.bench_function(BenchmarkId::from_parameter(format!("n{n}k{k}r{r}")), |b| {
            b.iter(|| h.solve(&SolverSettings::default()).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let (model, _) = sampled_triangle(2, 3);
    let net = NetworkScenario::triangle(2);
    let h = CompiledHierarchy::compile(&net, None, &level(2, 2, 2, model.c_bound)).unwrap();
    c.bench_function("product_extension/n2k2r2", |b| {
        b.iter(|| model.product_extension(&h.alphabet, h.words()).unwrap())
    });
}

criterion_group!(benches, words, compile, solve, oracle);
criterion_main!(benches);
