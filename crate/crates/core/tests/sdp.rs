use proptest::prelude::*;

use qcausal_core::sdp::*;

fn settings() -> SolverSettings {
    SolverSettings::default()
}

/// min cᵀx over a single block.
fn one_block(objective: Vec<f64>, block: PsdBlock) -> SdpProblem {
    SdpProblem {
        num_vars: objective.len(),
        objective,
        blocks: vec![block],
        ..Default::default()
    }
}

fn scalar_nonneg() -> SdpProblem {
    let mut b = PsdBlock::new(1);
    b.add_coefficient(0, 0, 0, 1.0);
    one_block(vec![1.0], b)
}

fn optimal_value(p: &SdpProblem) -> f64 {
    let r = solve(p, &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal, "{r:?}");
    r.value.unwrap()
}

#[test]
fn scalar_nonnegativity_has_optimum_zero() {
    assert!(optimal_value(&scalar_nonneg()).abs() < 1e-7);
}

#[test]
fn sdpa_text_of_scalar_problem() {
    assert_eq!(export_sdpa(&scalar_nonneg()), "1\n1\n1\n1\n1 1 1 1 1\n");
}

/// [[x, 1], [1, x]] ⪰ 0 forces x ≥ 1.
#[test]
fn two_by_two_bound() {
    let mut b = PsdBlock::new(2);
    b.add_coefficient(0, 0, 0, 1.0);
    b.add_coefficient(0, 1, 1, 1.0);
    b.add_constant(0, 1, 1.0);
    assert!((optimal_value(&one_block(vec![1.0], b)) - 1.0).abs() < 1e-7);
}

/// [[x, y], [y, 1]] ⪰ 0 with y = 2 gives x ≥ 4; the offset is carried.
#[test]
fn equality_and_offset() {
    let mut b = PsdBlock::new(2);
    b.add_coefficient(0, 0, 0, 1.0);
    b.add_coefficient(1, 0, 1, 1.0);
    b.add_constant(1, 1, 1.0);
    let mut p = one_block(vec![1.0, 0.0], b);
    p.offset = 0.5;
    p.equalities.push(LinearRow {
        coefficients: vec![(1, 1.0)],
        rhs: 2.0,
    });
    assert!((optimal_value(&p) - 4.5).abs() < 1e-6);
}

/// min t with tI − M ⪰ 0 is the largest eigenvalue of M.
#[test]
fn largest_eigenvalue() {
    let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
    let mut b = PsdBlock::new(3);
    for i in 0..3 {
        b.add_coefficient(0, i, i, 1.0);
        for j in i..3 {
            if m[i][j] != 0.0 {
                b.add_constant(i, j, -m[i][j]);
            }
        }
    }
    assert!((optimal_value(&one_block(vec![1.0], b)) - 3.0).abs() < 1e-7);
}

/// Two blocks: x ≥ 1 and x ≤ 3 with objective −x.
#[test]
fn interval_in_two_blocks() {
    let mut lo = PsdBlock::new(1);
    lo.add_coefficient(0, 0, 0, 1.0);
    lo.add_constant(0, 0, -1.0);
    let mut hi = PsdBlock::new(1);
    hi.add_coefficient(0, 0, 0, -1.0);
    hi.add_constant(0, 0, 3.0);
    let p = SdpProblem {
        num_vars: 1,
        objective: vec![-1.0],
        blocks: vec![lo, hi],
        ..Default::default()
    };
    assert!((optimal_value(&p) + 3.0).abs() < 1e-7);
}

/// [[x, 1], [1, −x]] ⪰ 0 has no solution.
#[test]
fn detects_infeasibility() {
    let mut b = PsdBlock::new(2);
    b.add_coefficient(0, 0, 0, 1.0);
    b.add_coefficient(0, 1, 1, -1.0);
    b.add_constant(0, 1, 1.0);
    let r = solve(&one_block(vec![0.0], b), &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
    assert_eq!(r.value, None);

    let mut p = scalar_nonneg();
    p.equalities.push(LinearRow {
        coefficients: vec![(0, 1.0)],
        rhs: -1.0,
    });
    assert_eq!(solve(&p, &settings()).unwrap().status, SolveStatus::Infeasible);
}

/// min x with only x ≤ 0.
#[test]
fn detects_unboundedness() {
    let mut b = PsdBlock::new(2);
    b.add_coefficient(0, 0, 0, -1.0);
    b.add_constant(1, 1, 1.0);
    let r = solve(&one_block(vec![1.0], b), &settings()).unwrap();
    assert_eq!(r.status, SolveStatus::Unbounded);
}

#[test]
fn rejects_malformed_problems() {
    let mut p = scalar_nonneg();
    p.blocks[0].add_coefficient(3, 0, 0, 1.0);
    assert!(solve(&p, &settings()).is_err());
    assert!(import_sdpa("1\n1\n1\n1\n1 1 2 2 1\n").is_err());
    assert!(import_sdpa("2\n1\n").is_err());
}

fn result(status: SolveStatus, value: Option<f64>) -> SolveResult {
    SolveResult {
        status,
        value,
        lower_bound: value,
        x: vec![],
        residuals: Residuals::default(),
        iterations: 0,
        solve_time: 0.0,
        tol: 1e-8,
    }
}

#[test]
fn rejection_rule() {
    use SolveStatus::*;
    let eps = 1e-3;
    let margin = MARGIN_FACTOR * 1e-8;
    assert_eq!(certify(&result(Optimal, Some(eps + 2.0 * margin)), eps), Decision::Rejected);
    assert_eq!(certify(&result(Optimal, Some(eps + margin)), eps), Decision::NotRejected);
    assert_eq!(certify(&result(Optimal, Some(0.0)), eps), Decision::NotRejected);
    assert_eq!(certify(&result(Optimal, Some(-1e-9)), 0.0), Decision::NotRejected);
    assert_eq!(certify(&result(Infeasible, None), eps), Decision::Rejected);
    assert_eq!(certify(&result(Unbounded, None), eps), Decision::NotRejected);
    assert_eq!(certify(&result(Inaccurate, Some(1.0)), eps), Decision::Inconclusive);
    assert_eq!(certify(&result(Timeout, None), eps), Decision::Inconclusive);
    assert_eq!(Decision::NotRejected.exit_code(), 0);
    assert_eq!(Decision::Rejected.exit_code(), 2);
    assert_eq!(Decision::Inconclusive.exit_code(), 3);
}

#[test]
fn zero_time_limit_times_out() {
    let mut b = PsdBlock::new(2);
    b.add_coefficient(0, 0, 0, 1.0);
    b.add_coefficient(0, 1, 1, 1.0);
    b.add_constant(0, 1, 1.0);
    let s = SolverSettings {
        time_limit: Some(0.0),
        ..settings()
    };
    let r = solve(&one_block(vec![1.0], b), &s).unwrap();
    assert_eq!(r.status, SolveStatus::Timeout);
}

fn small_value() -> impl Strategy<Value = f64> {
    prop_oneof![(-8i32..=8).prop_map(|v| v as f64 / 4.0), -10.0f64..10.0]
}

prop_compose! {
    fn random_problem()(num_vars in 1usize..5, dims in prop::collection::vec(1usize..5, 1..4))
        (objective in prop::collection::vec(small_value(), num_vars),
         constants in prop::collection::vec(
             prop::collection::vec((0usize..4, 0usize..4, small_value()), 0..6), dims.len()),
         coefficients in prop::collection::vec(
             prop::collection::vec((0..num_vars, 0usize..4, 0usize..4, small_value()), 0..8), dims.len()),
         equalities in prop::collection::vec(
             (prop::collection::vec((0..num_vars, small_value()), 1..3), small_value()), 0..3),
         offset in prop_oneof![Just(0.0), small_value()],
         dims in Just(dims), num_vars in Just(num_vars))
        -> SdpProblem
    {
        let blocks = dims
            .iter()
            .enumerate()
            .map(|(b, &dim)| {
                let mut blk = PsdBlock::new(dim);
                for &(i, j, v) in &constants[b] {
                    blk.add_constant(i % dim, j % dim, v);
                }
                for &(var, i, j, v) in &coefficients[b] {
                    blk.add_coefficient(var, i % dim, j % dim, v);
                }
                blk
            })
            .collect();
        let equalities = equalities
            .into_iter()
            .map(|(coefficients, rhs)| LinearRow { coefficients, rhs })
            .collect();
        let mut p = SdpProblem { num_vars, objective, offset, blocks, equalities };
        p.normalize();
        p
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sdpa_round_trip(p in random_problem()) {
        let text = export_sdpa(&p);
        let back = import_sdpa(&text).unwrap();
        prop_assert_eq!(export_sdpa(&back), text);
        let x: Vec<f64> = (0..p.num_vars).map(|v| 0.3 * v as f64 - 0.4).collect();
        prop_assert!((back.objective_value(&x) - p.objective_value(&x)).abs() < 1e-12);
        let (a, b) = (p.residuals(&x), back.residuals(&x));
        prop_assert!((a.equality - b.equality).abs() < 1e-12);
        prop_assert!((a.psd - b.psd).abs() < 1e-12);
    }
}
