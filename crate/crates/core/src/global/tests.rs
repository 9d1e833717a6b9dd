use super::*;
use crate::lp::{solve_lp, LpOutcome, LpTolerances};
use crate::qcqp::{Direction, QcqpModel, QuadExpr, Sense, VarKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn boxes_of(model: &QcqpModel) -> Vec<(f64, f64)> {
    model.variables.iter().map(|v| (v.lower, v.upper)).collect()
}

#[test]
fn unit_box_mccormick_rows() {
    // x, y in [0,1], term x*y: rows {w>=0, w>=x+y-1, w<=x, w<=y}
    let mut m = QcqpModel::new(Direction::Max);
    let x = m.add_variable(0.0, 1.0, VarKind::Continuous).unwrap();
    let y = m.add_variable(0.0, 1.0, VarKind::Continuous).unwrap();
    let mut obj = QuadExpr::new();
    obj.add_bilinear(1.0, x, y);
    m.set_objective(obj, Direction::Max).unwrap();
    let relax = build_relaxation(&m, &boxes_of(&m)).unwrap();
    let w = relax.aux_col(x, y).unwrap();
    assert_eq!(relax.lp.rows.len(), 4);
    // envelope exactness at the corners: maximizing w gives 1 at (1,1)
    let sol = match solve_lp(&relax.lp, &LpTolerances::default()).unwrap() {
        LpOutcome::Optimal(s) => s,
        other => panic!("{other:?}"),
    };
    assert!((sol.objective - 1.0).abs() < 1e-9);
    assert!((sol.point[w] - 1.0).abs() < 1e-9);
}

#[test]
fn degenerate_box_collapses_to_exact_row() {
    // x fixed at 2, y in [1,3]: the envelope forces w = 2y exactly
    let mut m = QcqpModel::new(Direction::Max);
    let x = m.add_variable(2.0, 2.0, VarKind::Continuous).unwrap();
    let y = m.add_variable(1.0, 3.0, VarKind::Continuous).unwrap();
    let mut obj = QuadExpr::new();
    obj.add_bilinear(1.0, x, y);
    m.set_objective(obj, Direction::Max).unwrap();
    let relax = build_relaxation(&m, &boxes_of(&m)).unwrap();
    for dir in [Direction::Max, Direction::Min] {
        let mut lp = relax.lp.clone();
        lp.direction = dir;
        let sol = match solve_lp(&lp, &LpTolerances::default()).unwrap() {
            LpOutcome::Optimal(s) => s,
            other => panic!("{other:?}"),
        };
        let expected = match dir {
            Direction::Max => 6.0,
            Direction::Min => 2.0,
        };
        assert!((sol.objective - expected).abs() < 1e-9);
        assert!((sol.point[relax.aux_col(x, y).unwrap()] - 2.0 * sol.point[y]).abs() < 1e-7);
    }
}

#[test]
fn envelope_contains_all_feasible_points_monte_carlo() {
    // random boxes, 10^4 sampled points: (x, y, w=x*y) satisfies all rows
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _case in 0..20 {
        let xl = rng.random_range(-5.0..5.0);
        let xu = xl + rng.random_range(0.0..6.0);
        let yl = rng.random_range(-5.0..5.0);
        let yu = yl + rng.random_range(0.0..6.0);
        let mut m = QcqpModel::new(Direction::Min);
        let x = m.add_variable(xl, xu, VarKind::Continuous).unwrap();
        let y = m.add_variable(yl, yu, VarKind::Continuous).unwrap();
        let mut obj = QuadExpr::new();
        obj.add_bilinear(1.0, x, y);
        m.set_objective(obj, Direction::Min).unwrap();
        let relax = build_relaxation(&m, &boxes_of(&m)).unwrap();
        let w = relax.aux_col(x, y).unwrap();
        for _ in 0..500 {
            let px = rng.random_range(xl..=xu);
            let py = rng.random_range(yl..=yu);
            let mut point = vec![0.0; relax.lp.num_cols];
            point[x] = px;
            point[y] = py;
            point[w] = px * py;
            for (row, r) in relax.lp.rows.iter().zip(relax.lp.row_residuals(&point)) {
                let viol = match row.sense {
                    Sense::Le => r.max(0.0),
                    Sense::Ge => (-r).max(0.0),
                    Sense::Eq => r.abs(),
                };
                assert!(viol <= 1e-9 * (1.0 + row.rhs.abs()), "violated row at ({px},{py})");
            }
            assert!(point[w] >= relax.lp.col_lower[w] - 1e-9);
            assert!(point[w] <= relax.lp.col_upper[w] + 1e-9);
        }
    }
}

#[test]
fn unbounded_bilinear_variable_is_rejected() {
    let mut m = QcqpModel::new(Direction::Min);
    let x = m.add_variable(0.0, f64::INFINITY, VarKind::Continuous).unwrap();
    let y = m.add_variable(0.0, 1.0, VarKind::Continuous).unwrap();
    let mut obj = QuadExpr::new();
    obj.add_bilinear(1.0, x, y);
    m.set_objective(obj, Direction::Min).unwrap();
    assert_eq!(
        build_relaxation(&m, &boxes_of(&m)).err(),
        Some(GlobalError::UnboundedBilinearVariable(x))
    );
    let res = solve_global(&m, &SolveOptions::default());
    assert_eq!(res.status, SolveStatus::UnboundedBox);
}

#[test]
fn purely_linear_model_solves_at_the_root() {
    let mut m = QcqpModel::new(Direction::Max);
    let x = m.add_variable(0.0, 4.0, VarKind::Continuous).unwrap();
    let y = m.add_variable(0.0, 4.0, VarKind::Continuous).unwrap();
    let mut row = QuadExpr::new();
    row.add_linear(1.0, x).add_linear(1.0, y);
    m.add_constraint(row, Sense::Le, 5.0, "cap").unwrap();
    let mut obj = QuadExpr::new();
    obj.add_linear(2.0, x).add_linear(1.0, y);
    m.set_objective(obj, Direction::Max).unwrap();
    let res = solve_global(&m, &SolveOptions::default());
    assert_eq!(res.status, SolveStatus::Optimal);
    assert_eq!(res.nodes, 1);
    assert!((res.primal - 9.0).abs() < 1e-6);
}

#[test]
fn bilinear_saddle_reaches_minus_one() {
    // min x1*x2 over [-1,1]^2 = -1 at (-1,1) or (1,-1); grid oracle at 1e-2
    // confirms the same value.
    let mut m = QcqpModel::new(Direction::Min);
    let x = m.add_variable(-1.0, 1.0, VarKind::Continuous).unwrap();
    let y = m.add_variable(-1.0, 1.0, VarKind::Continuous).unwrap();
    let mut obj = QuadExpr::new();
    obj.add_bilinear(1.0, x, y);
    m.set_objective(obj, Direction::Min).unwrap();
    let res = solve_global(&m, &SolveOptions::default());
    assert_eq!(res.status, SolveStatus::Optimal);
    assert!((res.primal - (-1.0)).abs() < 1e-6);
    let p = res.point.unwrap();
    assert!((p[x] * p[y] - (-1.0)).abs() < 1e-6);

    let mut oracle = f64::INFINITY;
    let steps = 200;
    for i in 0..=steps {
        let px = -1.0 + 2.0 * i as f64 / steps as f64;
        for j in 0..=steps {
            let py = -1.0 + 2.0 * j as f64 / steps as f64;
            oracle = oracle.min(px * py);
        }
    }
    assert!((res.primal - oracle).abs() <= 1e-6);
}

#[test]
fn pure_binary_model_matches_enumeration() {
    // knapsack-ish: max 3a + 4b + 2c s.t. 2a + 3b + c <= 4, binaries
    let mut m = QcqpModel::new(Direction::Max);
    let a = m.add_variable(0.0, 1.0, VarKind::Binary).unwrap();
    let b = m.add_variable(0.0, 1.0, VarKind::Binary).unwrap();
    let c = m.add_variable(0.0, 1.0, VarKind::Binary).unwrap();
    let mut row = QuadExpr::new();
    row.add_linear(2.0, a).add_linear(3.0, b).add_linear(1.0, c);
    m.add_constraint(row, Sense::Le, 4.0, "cap").unwrap();
    let mut obj = QuadExpr::new();
    obj.add_linear(3.0, a).add_linear(4.0, b).add_linear(2.0, c);
    m.set_objective(obj, Direction::Max).unwrap();
    let res = solve_global(&m, &SolveOptions::default());
    assert_eq!(res.status, SolveStatus::Optimal);

    let mut best = f64::NEG_INFINITY;
    for bits in 0..8u32 {
        let p = [(bits & 1) as f64, ((bits >> 1) & 1) as f64, ((bits >> 2) & 1) as f64];
        if 2.0 * p[0] + 3.0 * p[1] + p[2] <= 4.0 {
            best = best.max(3.0 * p[0] + 4.0 * p[1] + 2.0 * p[2]);
        }
    }
    assert!((res.primal - best).abs() < 1e-9, "{} vs {}", res.primal, best);
}

#[test]
fn branch_prefers_fractional_binary() {
    let mut m = QcqpModel::new(Direction::Min);
    let u = m.add_variable(0.0, 1.0, VarKind::Binary).unwrap();
    let x = m.add_variable(0.0, 1.0, VarKind::Continuous).unwrap();
    let y = m.add_variable(0.0, 1.0, VarKind::Continuous).unwrap();
    let mut obj = QuadExpr::new();
    obj.add_linear(1.0, u).add_bilinear(1.0, x, y);
    m.set_objective(obj, Direction::Min).unwrap();
    let relax = build_relaxation(&m, &boxes_of(&m)).unwrap();
    let node = Node::root(boxes_of(&m));
    let mut lp_point = vec![0.0; relax.lp.num_cols];
    lp_point[u] = 0.5;
    lp_point[x] = 0.6;
    lp_point[y] = 0.6;
    lp_point[relax.aux_col(x, y).unwrap()] = 0.3; // small violation 0.06
    let (zero, one) = branch(&m, &relax, &node, &lp_point).unwrap();
    assert_eq!(zero.boxes[u], (0.0, 0.0));
    assert_eq!(one.boxes[u], (1.0, 1.0));
}

#[test]
fn branch_splits_max_violation_variable_with_clamp() {
    let mut m = QcqpModel::new(Direction::Min);
    let mut ids = Vec::new();
    for _ in 0..8 {
        ids.push(m.add_variable(0.0, 1.0, VarKind::Continuous).unwrap());
    }
    let mut obj = QuadExpr::new();
    obj.add_bilinear(1.0, ids[0], ids[1]);
    obj.add_bilinear(1.0, ids[6], ids[7]);
    m.set_objective(obj, Direction::Min).unwrap();
    let relax = build_relaxation(&m, &boxes_of(&m)).unwrap();
    let node = Node::root(boxes_of(&m));
    let mut lp_point = vec![0.0; relax.lp.num_cols];
    // small violation on (0,1), large on (6,7); var 7 and 6 tie, 6 wins by index
    lp_point[ids[0]] = 0.5;
    lp_point[ids[1]] = 0.5;
    lp_point[relax.aux_col(ids[0], ids[1]).unwrap()] = 0.3;
    lp_point[ids[6]] = 1.0; // at box edge: split clamps into [0.2, 0.8]
    lp_point[ids[7]] = 0.5;
    lp_point[relax.aux_col(ids[6], ids[7]).unwrap()] = 0.0;
    let (left, right) = branch(&m, &relax, &node, &lp_point).unwrap();
    assert_eq!(left.boxes[ids[6]], (0.0, 0.8));
    assert_eq!(right.boxes[ids[6]], (0.8, 1.0));
    assert!(left.boxes[ids[6]].1 > 0.0 && right.boxes[ids[6]].0 < 1.0, "both children nonempty");
}

#[test]
fn dual_bound_is_monotone_and_incumbents_feasible() {
    // constrained bilinear model; track incumbents through the callback
    let mut m = QcqpModel::new(Direction::Min);
    let x = m.add_variable(0.0, 2.0, VarKind::Continuous).unwrap();
    let y = m.add_variable(0.0, 2.0, VarKind::Continuous).unwrap();
    let z = m.add_variable(0.0, 2.0, VarKind::Continuous).unwrap();
    let mut r1 = QuadExpr::new();
    r1.add_linear(1.0, x).add_linear(1.0, y).add_linear(1.0, z);
    m.add_constraint(r1, Sense::Ge, 2.0, "lo").unwrap();
    let mut r2 = QuadExpr::new();
    r2.add_bilinear(1.0, x, y);
    m.add_constraint(r2, Sense::Le, 1.0, "cap").unwrap();
    let mut obj = QuadExpr::new();
    obj.add_bilinear(1.0, x, z).add_bilinear(-1.0, y, z).add_linear(0.5, x);
    m.set_objective(obj, Direction::Min).unwrap();
    let mut incumbents: Vec<(Vec<f64>, f64)> = Vec::new();
    let res = solve_global_with_callback(&m, &SolveOptions::default(), &mut |p, o| {
        incumbents.push((p.to_vec(), o));
    });
    assert_eq!(res.status, SolveStatus::Optimal);
    assert!(!incumbents.is_empty());
    let mut last = f64::INFINITY;
    for (p, o) in &incumbents {
        assert!(*o <= last + 1e-12, "incumbents must improve monotonically");
        last = *o;
        assert!(m.max_scaled_violation(p).unwrap() <= 1e-6);
    }
    assert!(res.primal >= res.dual - 1e-6 * (1.0 + res.dual.abs()));
}
