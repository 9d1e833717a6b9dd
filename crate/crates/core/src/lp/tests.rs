use super::*;
use crate::qcqp::{Direction, LinearExpr, Sense};

fn tol() -> LpTolerances {
    LpTolerances::default()
}

fn expect_optimal(outcome: LpOutcome) -> LpSolution {
    match outcome {
        LpOutcome::Optimal(s) => s,
        other => panic!("expected optimal, got {other:?}"),
    }
}

#[test]
fn maximizes_over_simplex() {
    // max x + y s.t. x + y <= 1, x, y in [0, 1]
    let mut p = LpProblem::new(Direction::Max);
    let x = p.add_col(0.0, 1.0);
    let y = p.add_col(0.0, 1.0);
    p.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
    let mut obj = LinearExpr::new();
    obj.add_term(1.0, x).add_term(1.0, y);
    p.objective = obj;
    let sol = expect_optimal(solve_lp(&p, &tol()).unwrap());
    assert!((sol.objective - 1.0).abs() < 1e-9);
    assert!((sol.point[x] + sol.point[y] - 1.0).abs() < 1e-9);
}

#[test]
fn detects_infeasibility_with_witness() {
    // x >= 2 and x <= 1
    let mut p = LpProblem::new(Direction::Min);
    let x = p.add_col(0.0, f64::INFINITY);
    p.add_row(vec![(x, 1.0)], Sense::Ge, 2.0);
    p.add_row(vec![(x, 1.0)], Sense::Le, 1.0);
    p.objective = LinearExpr::term(1.0, x);
    match solve_lp(&p, &tol()).unwrap() {
        LpOutcome::Infeasible { witness_row } => assert!(witness_row < 2),
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn detects_unboundedness_with_ray() {
    // max x, x >= 0, no upper bound, no rows
    let mut p = LpProblem::new(Direction::Max);
    let x = p.add_col(0.0, f64::INFINITY);
    p.objective = LinearExpr::term(1.0, x);
    match solve_lp(&p, &tol()).unwrap() {
        LpOutcome::Unbounded { ray } => assert_eq!(ray, vec![1.0]),
        other => panic!("expected unbounded, got {other:?}"),
    }
}

#[test]
fn warm_start_with_own_basis_takes_no_pivots() {
    let mut p = LpProblem::new(Direction::Max);
    let x = p.add_col(0.0, 10.0);
    let y = p.add_col(0.0, 10.0);
    p.add_row(vec![(x, 2.0), (y, 1.0)], Sense::Le, 10.0);
    p.add_row(vec![(x, 1.0), (y, 3.0)], Sense::Le, 15.0);
    let mut obj = LinearExpr::new();
    obj.add_term(3.0, x).add_term(2.0, y);
    p.objective = obj;
    let sol = expect_optimal(solve_lp(&p, &tol()).unwrap());
    let warm = expect_optimal(solve_lp_warm(&p, &sol.basis, &tol()).unwrap());
    assert_eq!(warm.pivots, 0);
    assert!((warm.objective - sol.objective).abs() < 1e-9);
}

#[test]
fn tightened_bound_never_improves_a_minimum() {
    let mut p = LpProblem::new(Direction::Min);
    let x = p.add_col(0.0, 4.0);
    let y = p.add_col(0.0, 4.0);
    p.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0);
    let mut obj = LinearExpr::new();
    obj.add_term(2.0, x).add_term(1.0, y);
    p.objective = obj;
    let parent = expect_optimal(solve_lp(&p, &tol()).unwrap());
    let mut child = p.clone();
    child.col_upper[y] = 1.0; // shrink y's box
    let child_sol = expect_optimal(solve_lp_warm(&child, &parent.basis, &tol()).unwrap());
    assert!(child_sol.objective >= parent.objective - 1e-9);
}

#[test]
fn incompatible_basis_falls_back_to_cold_start() {
    let mut rng_state = 0x2545F4914F6CDD1Du64;
    let mut next = move || {
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        (rng_state >> 11) as f64 / (1u64 << 53) as f64
    };
    for trial in 0..50 {
        let n = 3 + trial % 4;
        let m = 2 + trial % 3;
        let mut p = LpProblem::new(if trial % 2 == 0 { Direction::Min } else { Direction::Max });
        for _ in 0..n {
            p.add_col(0.0, 1.0 + 4.0 * next());
        }
        for _ in 0..m {
            let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (j, next() * 2.0 - 0.5)).collect();
            let rhs = 1.0 + 3.0 * next();
            p.add_row(coeffs, Sense::Le, rhs);
        }
        let mut obj = LinearExpr::new();
        for j in 0..n {
            obj.add_term(next() * 2.0 - 1.0, j);
        }
        p.objective = obj;
        let cold = solve_lp(&p, &tol()).unwrap();
        // garbage basis: wrong length forces the fallback path
        let junk = LpBasis { basic: vec![0; m + 1], nonbasic: vec![] };
        let warm = solve_lp_warm(&p, &junk, &tol()).unwrap();
        match (cold, warm) {
            (LpOutcome::Optimal(a), LpOutcome::Optimal(b)) => {
                assert!(
                    (a.objective - b.objective).abs() <= 1e-8 * (1.0 + a.objective.abs()),
                    "trial {trial}: {} vs {}",
                    a.objective,
                    b.objective
                );
            }
            (a, b) => panic!("outcome mismatch on trial {trial}: {a:?} vs {b:?}"),
        }
    }
}

#[test]
fn recomputed_objective_matches_reported() {
    let mut p = LpProblem::new(Direction::Max);
    let x = p.add_col(0.0, 100.0);
    let y = p.add_col(-5.0, 50.0);
    let z = p.add_col(0.0, f64::INFINITY);
    p.add_row(vec![(x, 1.0), (y, 2.0), (z, 1.0)], Sense::Le, 40.0);
    p.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Ge, -10.0);
    p.add_row(vec![(y, 1.0), (z, 3.0)], Sense::Eq, 12.0);
    let mut obj = LinearExpr::new();
    obj.add_term(1.5, x).add_term(1.0, y).add_term(0.5, z);
    obj.add_constant(7.0);
    p.objective = obj;
    let sol = expect_optimal(solve_lp(&p, &tol()).unwrap());
    let recomputed = p.objective.value(&sol.point);
    assert!((recomputed - sol.objective).abs() <= 1e-8 * (1.0 + sol.objective.abs()));
    for (row, r) in p.rows.iter().zip(p.row_residuals(&sol.point)) {
        let viol = match row.sense {
            Sense::Le => r.max(0.0),
            Sense::Ge => (-r).max(0.0),
            Sense::Eq => r.abs(),
        };
        assert!(viol <= LP_FEAS_TOL * (1.0 + row.rhs.abs()));
    }
}

#[test]
fn beales_cycling_example_terminates() {
    // Classic Dantzig-rule cycling instance; Bland fallback must finish it.
    let mut p = LpProblem::new(Direction::Min);
    let x1 = p.add_col(0.0, f64::INFINITY);
    let x2 = p.add_col(0.0, f64::INFINITY);
    let x3 = p.add_col(0.0, f64::INFINITY);
    let x4 = p.add_col(0.0, f64::INFINITY);
    p.add_row(vec![(x1, 0.25), (x2, -60.0), (x3, -0.04), (x4, 9.0)], Sense::Le, 0.0);
    p.add_row(vec![(x1, 0.5), (x2, -90.0), (x3, -0.02), (x4, 3.0)], Sense::Le, 0.0);
    p.add_row(vec![(x3, 1.0)], Sense::Le, 1.0);
    let mut obj = LinearExpr::new();
    obj.add_term(-0.75, x1).add_term(150.0, x2).add_term(-0.02, x3).add_term(6.0, x4);
    p.objective = obj;
    let sol = expect_optimal(solve_lp(&p, &tol()).unwrap());
    assert!((sol.objective - (-0.05)).abs() < 1e-9, "objective {}", sol.objective);
}

#[test]
fn degenerate_transportation_instance_terminates() {
    // 3x3 transportation with all supplies/demands equal: heavily degenerate.
    let mut p = LpProblem::new(Direction::Min);
    let mut cols = Vec::new();
    let cost = [4.0, 1.0, 3.0, 2.0, 5.0, 2.0, 3.0, 2.0, 1.0];
    for _ in 0..9 {
        cols.push(p.add_col(0.0, f64::INFINITY));
    }
    for i in 0..3 {
        let coeffs: Vec<(usize, f64)> = (0..3).map(|j| (cols[3 * i + j], 1.0)).collect();
        p.add_row(coeffs, Sense::Eq, 10.0);
    }
    for j in 0..3 {
        let coeffs: Vec<(usize, f64)> = (0..3).map(|i| (cols[3 * i + j], 1.0)).collect();
        p.add_row(coeffs, Sense::Eq, 10.0);
    }
    let mut obj = LinearExpr::new();
    for (k, &c) in cost.iter().enumerate() {
        obj.add_term(c, cols[k]);
    }
    p.objective = obj;
    let sol = expect_optimal(solve_lp(&p, &tol()).unwrap());
    // Birkhoff: the LP optimum is the min-cost assignment, 10*(1+2+1) = 40
    assert!((sol.objective - 40.0).abs() < 1e-9, "objective {}", sol.objective);
}

#[test]
fn equality_rows_and_free_variables() {
    // min x + y with free y and x + y = 3: objective is constant on the
    // feasible set, so any feasible point is optimal.
    let mut p = LpProblem::new(Direction::Min);
    let x = p.add_col(0.0, 5.0);
    let y = p.add_col(f64::NEG_INFINITY, f64::INFINITY);
    p.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Eq, 3.0);
    let mut obj = LinearExpr::new();
    obj.add_term(1.0, x).add_term(1.0, y);
    p.objective = obj;
    let sol = expect_optimal(solve_lp(&p, &tol()).unwrap());
    assert!((sol.objective - 3.0).abs() < 1e-9);
    assert!((sol.point[x] + sol.point[y] - 3.0).abs() < 1e-7);
}
