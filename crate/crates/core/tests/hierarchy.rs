use qcausal_core::hierarchy::{CompiledHierarchy, HierarchyConfig, ScenarioProblem};
use qcausal_core::moment::ObjectiveMode;
use qcausal_core::oracle::sample_model;
use qcausal_core::scenario::{presets, Distribution, NetworkScenario};
use qcausal_core::sdp::{certify, Decision, SolveStatus, SolverSettings};

const TOL: f64 = 1e-8;

fn triangle_target(table: Vec<f64>) -> ScenarioProblem {
    let d = Distribution::new(vec!["A".into(), "B".into(), "C".into()], vec![2; 3], table).unwrap();
    ScenarioProblem::new(&presets::triangle(2), Some(&d)).unwrap()
}

/// v·(perfectly correlated bits) + (1 − v)·uniform.
fn noisy_correlated(v: f64) -> Vec<f64> {
    (0..8)
        .map(|i| {
            let corr = if i == 0 || i == 7 { 0.5 } else { 0.0 };
            v * corr + (1.0 - v) / 8.0
        })
        .collect()
}

fn value(problem: &ScenarioProblem, n: usize, k: usize, r: usize, c_bound: f64) -> f64 {
    let config = HierarchyConfig {
        n,
        k,
        r,
        c_bound,
        ..HierarchyConfig::default()
    };
    let h = problem.compile(&config).unwrap();
    let res = h
        .solve(&SolverSettings {
            tol: TOL,
            ..SolverSettings::default()
        })
        .unwrap();
    assert_eq!(res.status, SolveStatus::Optimal, "n={n} k={k} r={r}");
    res.value.unwrap()
}

#[test]
fn rank_two_models_are_not_rejected() {
    let net = NetworkScenario::triangle(2);
    for seed in 0..3 {
        let (model, dist) = sample_model(&net, 2, 2, 100 + seed).unwrap();
        let problem = ScenarioProblem::new(&presets::triangle(2), Some(&dist)).unwrap();
        for (n, k) in [(1, 1), (1, 2)] {
            let config = HierarchyConfig {
                n,
                k,
                r: 2,
                c_bound: model.c_bound,
                ..HierarchyConfig::default()
            };
            let res = problem.compile(&config).unwrap().solve(&SolverSettings::default()).unwrap();
            assert_eq!(certify(&res, 0.0), Decision::NotRejected, "seed {seed} n={n} k={k}");
            assert!(res.value.unwrap() <= 1e-6);
        }
    }
}

#[test]
fn values_grow_with_k() {
    for v in [1.0, 0.8] {
        let p = triangle_target(noisy_correlated(v));
        let vals: Vec<f64> = (1..=3).map(|k| value(&p, 1, k, 1, 1.0)).collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 2.0 * TOL, "v={v}: {vals:?}");
        }
    }
}

#[test]
fn values_grow_with_n() {
    let p = triangle_target(noisy_correlated(1.0));
    let one = value(&p, 1, 2, 1, 0.25);
    let two = value(&p, 2, 2, 1, 0.25);
    assert!(two >= one - 2.0 * TOL, "{one} {two}");
    assert!(two > 1e-3, "{two}");
}

#[test]
fn linear_mode_needs_a_target() {
    let config = HierarchyConfig {
        mode: ObjectiveMode::LinearConstraints,
        ..HierarchyConfig::default()
    };
    assert!(CompiledHierarchy::compile(&NetworkScenario::triangle(2), None, &config).is_err());
}

#[test]
fn invalid_parameters_are_refused() {
    let net = NetworkScenario::triangle(2);
    for config in [
        HierarchyConfig { n: 0, ..HierarchyConfig::default() },
        HierarchyConfig { c_bound: -1.0, ..HierarchyConfig::default() },
        HierarchyConfig { c_bound: f64::NAN, ..HierarchyConfig::default() },
    ] {
        assert!(CompiledHierarchy::compile(&net, None, &config).is_err());
    }
}

#[test]
fn every_mode_accepts_a_compatible_target() {
    let net = NetworkScenario::triangle(2);
    let (model, dist) = sample_model(&net, 2, 1, 9).unwrap();
    let problem = ScenarioProblem::new(&presets::triangle(2), Some(&dist)).unwrap();
    for mode in [
        ObjectiveMode::PolarizedObjective,
        ObjectiveMode::LinearConstraints,
        ObjectiveMode::QuadraticEpigraph,
    ] {
        // The polarized objective is quadratic in the state.
        let n = if mode == ObjectiveMode::PolarizedObjective { 2 } else { 1 };
        let config = HierarchyConfig {
            n,
            k: 2,
            c_bound: model.c_bound,
            mode,
            ..HierarchyConfig::default()
        };
        let res = problem.compile(&config).unwrap().solve(&SolverSettings::default()).unwrap();
        assert_eq!(certify(&res, 0.0), Decision::NotRejected, "{mode:?}");
    }
}

/// The PR box lies at squared distance (2 − √2)²/4 from the Tsirelson box:
/// each of the 16 conditional cells differs by (2 − √2)/8.
#[test]
fn pr_box_distance_matches_tsirelson_box() {
    let mut table = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    table.push(if a ^ b == x & y { 0.125 } else { 0.0 });
                }
            }
        }
    }
    let vars = ["X", "Y", "A", "B"].map(String::from).to_vec();
    let d = Distribution::new(vars, vec![2; 4], table).unwrap();
    let problem = ScenarioProblem::new(&presets::bell(2, 2), Some(&d)).unwrap();
    let expected = (2.0 - 2f64.sqrt()).powi(2) / 4.0;
    let projective = HierarchyConfig {
        profile: qcausal_core::algebra::Profile {
            hermitian_generators: true,
            mode: qcausal_core::algebra::AlgebraMode::LegacyProjective,
        },
        ..HierarchyConfig::default()
    };
    let rank_one = HierarchyConfig {
        k: 2,
        ..HierarchyConfig::default()
    };
    for config in [projective, rank_one] {
        let res = problem.compile(&config).unwrap().solve(&SolverSettings::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.value.unwrap() - expected).abs() < 1e-6, "{:?}", res.value);
        assert_eq!(certify(&res, 0.0), Decision::Rejected);
    }
}
