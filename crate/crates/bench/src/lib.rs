//! Fixtures shared by the benchmarks in `benches/`.

use qcausal_core::hierarchy::{HierarchyConfig, ScenarioProblem};
use qcausal_core::oracle::{sample_model, FiniteModel};
use qcausal_core::scenario::{presets, Distribution, NetworkScenario};

/// Perfectly correlated bits on the two-outcome triangle.
pub fn correlated_triangle() -> ScenarioProblem {
    let mut table = vec![0.0; 8];
    table[0] = 0.5;
    table[7] = 0.5;
    let d = Distribution::new(vec!["A".into(), "B".into(), "C".into()], vec![2; 3], table)
        .expect("valid distribution");
    ScenarioProblem::new(&presets::triangle(2), Some(&d)).expect("triangle prepares")
}

/// A qubit triangle model of Schmidt rank `r` and the problem built from its
/// distribution.
pub fn sampled_triangle(r: usize, seed: u64) -> (FiniteModel, ScenarioProblem) {
    let (model, dist) = sample_model(&NetworkScenario::triangle(2), 2, r, seed).expect("sampling succeeds");
    let problem = ScenarioProblem::new(&presets::triangle(2), Some(&dist)).expect("triangle prepares");
    (model, problem)
}

pub fn level(n: usize, k: usize, r: usize, c_bound: f64) -> HierarchyConfig {
    HierarchyConfig {
        n,
        k,
        r,
        c_bound,
        ..HierarchyConfig::default()
    }
}
