use std::collections::BTreeMap;

use super::*;
use crate::games::KnapsackGame;
use crate::pooling::catalog;
use crate::qcqp::Sense;

fn cfg() -> EngineConfig {
    EngineConfig::default()
}

#[test]
fn subproblem_payoffs_match_the_reference_points() {
    let game = catalog("haverly-2p-pc-cont").unwrap();
    // player 1 at the perfect-competition prices earns 400
    let ctx = SubContext::PriceTaker {
        prices: [("H".into(), 10.0), ("L".into(), 15.0)].into(),
    };
    let s = solve_subproblem(&game, 0, &ctx, &cfg().sub_options()).unwrap();
    assert!((s.primal() - 400.0).abs() < 1e-3, "{}", s.primal());

    // at zero prices the shut-down point is optimal
    let zero = SubContext::PriceTaker {
        prices: [("H".into(), 0.0), ("L".into(), 0.0)].into(),
    };
    let s0 = solve_subproblem(&game, 0, &zero, &cfg().sub_options()).unwrap();
    assert!(s0.primal().abs() < 1e-9, "{}", s0.primal());

    // player 2 against player 1 fixed at the Nash-Cournot solution earns 375
    let nc = catalog("haverly-2p-nc-cont").unwrap();
    let ctx = SubContext::NashCournot {
        rival_totals: [("H".into(), 25.0), ("L".into(), 125.0)].into(),
    };
    let s2 = solve_subproblem(&nc, 1, &ctx, &cfg().sub_options()).unwrap();
    assert!((s2.primal() - 375.0).abs() < 1e-2, "{}", s2.primal());
}

fn haverly_optimum_point(player: &crate::pooling::PoolingInstance) -> (crate::pooling::VarMap, Vec<f64>) {
    let fs = crate::pooling::build_feasible_set(player).unwrap();
    let mut x = vec![0.0; fs.model.num_vars()];
    x[fs.vars.f_in["B"]] = 100.0;
    x[fs.vars.f_in["C"]] = 100.0;
    x[fs.vars.f_out["L"]] = 200.0;
    x[fs.vars.arc[&("B".into(), "P".into())]] = 100.0;
    x[fs.vars.arc[&("C".into(), "L".into())]] = 100.0;
    x[fs.vars.arc[&("P".into(), "L".into())]] = 100.0;
    x[fs.vars.conc[&("P".into(), "sulfur".into())]] = 0.01;
    (fs.vars, x)
}

#[test]
fn rmp_cuts_have_the_expected_shape() {
    let game = catalog("haverly-2p-pc-cont").unwrap();
    let mut cuts = CutPool::seeded(&game).unwrap();
    // stored point: the classic optimum (sell 200 low sulfur, cost 2600)
    let (vars, x) = haverly_optimum_point(&game.players[0]);
    cuts.add(0, StoredPoint::from_point(&game.players[0], &vars, &x));

    let rmp = build_rmp(&game, LinkingSet::for_game(&game, false), &cuts).unwrap();
    // the zero-point cut reads w_0 >= 0
    let zero_cut = rmp.model.constraint_by_label("cut_p0_0").unwrap();
    assert_eq!(zero_cut.sense, Sense::Ge);
    assert_eq!(zero_cut.rhs, 0.0);
    assert_eq!(zero_cut.body.linear.terms, vec![(1.0, rmp.w[0])]);
    // the stored optimum yields w_0 - 200 pi_L >= -2600
    let cut = rmp.model.constraint_by_label("cut_p0_1").unwrap();
    assert_eq!(cut.sense, Sense::Ge);
    assert!((cut.rhs - (-2600.0)).abs() < 1e-9);
    let mut expected = vec![(1.0, rmp.w[0]), (-200.0, rmp.pi["L"])];
    expected.sort_by_key(|&(_, v)| v);
    assert_eq!(cut.body.linear.terms, expected);
}

#[test]
fn nc_rmp_cuts_are_linear_in_rival_outputs() {
    let game = catalog("haverly-2p-nc-cont").unwrap();
    let mut cuts = CutPool::seeded(&game).unwrap();
    let (vars, x) = haverly_optimum_point(&game.players[0]);
    cuts.add(0, StoredPoint::from_point(&game.players[0], &vars, &x));
    let rmp = build_rmp(&game, LinkingSet::NashCournot, &cuts).unwrap();
    let cut = rmp.model.constraint_by_label("cut_p0_1").unwrap();
    assert!(cut.body.bilinears.is_empty(), "cut must be linear");
    // w_0 + beta_L * 200 * f_out_2L >= (23 - 0.04*200)*200 - 2600
    let rhs_expected = (23.0 - 0.04 * 200.0) * 200.0 - 2600.0;
    assert!((cut.rhs - rhs_expected).abs() < 1e-9, "rhs {}", cut.rhs);
    let rival_l = rmp.player_vars[1].f_out["L"];
    assert!(cut
        .body
        .linear
        .terms
        .iter()
        .any(|&(c, v)| v == rival_l && (c - 0.04 * 200.0).abs() < 1e-12));
}

#[test]
fn empty_cut_pool_is_rejected() {
    let game = catalog("haverly-2p-pc-cont").unwrap();
    let mut cuts = CutPool::seeded(&game).unwrap();
    cuts.per_player[1].clear();
    assert!(matches!(
        build_rmp(&game, LinkingSet::for_game(&game, false), &cuts),
        Err(EngineError::EmptyCutPool(1))
    ));
}

#[test]
fn verify_flags_the_welfare_solution_of_the_symmetric_instance() {
    // welfare point: one player takes the low market (400), the other blends
    // for the high market (200); at prices (10, 15) the latter could also
    // earn 400, so its disequilibrium is 200
    let game = catalog("haverly-sym-pc2").unwrap();
    let report = welfare_heuristic(&game, &cfg()).unwrap();
    assert_eq!(report.verdict, Verdict::Inconclusive);
    let mut profits: Vec<f64> = report.players.iter().map(|p| p.profit).collect();
    profits.sort_by(f64::total_cmp);
    assert!((profits[0] - 200.0).abs() < 0.5, "{profits:?}");
    assert!((profits[1] - 400.0).abs() < 0.5, "{profits:?}");
    let max_delta = report.max_delta();
    assert!((max_delta - 200.0).abs() < 0.5, "delta {max_delta}");
}

#[test]
fn verify_accepts_a_best_response() {
    // re-solving a player at the candidate prices gives a zero delta for it
    let game = catalog("haverly-single").unwrap();
    let prices: BTreeMap<String, f64> = [("H".into(), 9.0), ("L".into(), 15.0)].into();
    let ctx = SubContext::PriceTaker { prices: prices.clone() };
    let s = solve_subproblem(&game, 0, &ctx, &cfg().sub_options()).unwrap();
    let point = s.point().unwrap().to_vec();
    let out = verify(&game, &prices, &[point], &cfg()).unwrap();
    assert_eq!(out.verdict, Verdict::Equilibrium);
    assert!(out.players[0].delta <= 1e-3);
    assert!((out.players[0].profit - 400.0).abs() < 1e-3);
}

#[test]
fn verify_rejects_infeasible_points() {
    let game = catalog("haverly-single").unwrap();
    let fs = crate::pooling::build_feasible_set(&game.players[0]).unwrap();
    let mut bad = vec![0.0; fs.model.num_vars()];
    bad[fs.vars.f_out["L"]] = 50.0; // output without inflow
    let prices: BTreeMap<String, f64> = [("H".into(), 9.0), ("L".into(), 15.0)].into();
    assert!(matches!(
        verify(&game, &prices, &[bad], &cfg()),
        Err(EngineError::InfeasiblePoint(_))
    ));
}

#[test]
fn warmstart_pt_prices_stay_in_range_and_points_are_feasible() {
    let game = catalog("haverly-2p-pc-cont").unwrap();
    let a = warmstart_pt(&game, 7, &cfg()).unwrap();
    let b = warmstart_pt(&game, 7, &cfg()).unwrap();
    assert_eq!(a.prices, b.prices, "same seed, same draw");
    let c = warmstart_pt(&game, 8, &cfg()).unwrap();
    assert_ne!(a.prices, c.prices);
    for m in &game.markets {
        let p = a.prices[&m.output];
        assert!(p >= 0.05 * m.alpha - 1e-12 && p <= 0.95 * m.alpha + 1e-12);
    }
    for (j, stored) in a.points.iter().enumerate() {
        let fs = crate::pooling::build_feasible_set(&game.players[j]).unwrap();
        assert!(fs.model.max_scaled_violation(&stored.x).unwrap() <= 1e-6);
    }
}

#[test]
fn warmstart_nc_bounds_cover_the_returned_pair() {
    let game = catalog("haverly-2p-nc-mip").unwrap();
    let ws = warmstart_nc(&game, 3, &cfg()).unwrap();
    for (payoff, dual) in ws.payoffs.iter().zip(&ws.dual_bounds) {
        assert!(dual >= &(payoff - 1e-6), "dual {dual} below payoff {payoff}");
    }
    // the returned pair verifies as an equilibrium on this instance
    let max_delta: f64 = ws
        .dual_bounds
        .iter()
        .zip(&ws.payoffs)
        .map(|(u, p)| u - p)
        .fold(0.0, f64::max);
    assert!(max_delta <= 1e-3, "max delta {max_delta}");
}

#[test]
fn nc_warmstart_zero_beta_markets_get_zero_rival_output() {
    let mut game = catalog("haverly-2p-nc-cont").unwrap();
    game.markets[0].beta = 0.0; // H market turns perfectly elastic
    let ws = warmstart_nc(&game, 5, &cfg()).unwrap();
    // division guard: no rival output was imputed for the zero-slope market,
    // so the procedure still runs and returns feasible stored points
    for (j, stored) in ws.stored.iter().enumerate() {
        let fs = crate::pooling::build_feasible_set(&game.players[j]).unwrap();
        assert!(fs.model.max_scaled_violation(&stored.x).unwrap() <= 1e-6);
    }
}

#[test]
fn jacobi_stops_immediately_at_an_equilibrium() {
    let game = catalog("haverly-2p-nc-cont").unwrap();
    // start from the known equilibrium profile
    let report = monolithic_nc_heuristic(&game, &cfg()).unwrap();
    assert_eq!(report.verdict, Verdict::Equilibrium);
    let jr = jacobi(&game, Some(report.player_points.clone()), 5, &cfg()).unwrap();
    assert!(jr.converged);
    assert_eq!(jr.rounds, 1);

    let none = jacobi(&game, None, 0, &cfg()).unwrap();
    assert!(!none.converged);
    assert_eq!(none.payoff_trajectory.len(), 1);
    assert!(none.payoff_trajectory[0].iter().all(|&p| p.abs() < 1e-9));
}

#[test]
fn mesh_grid_hits_the_known_cells() {
    let game = catalog("haverly-sym-pc2").unwrap();
    // two tiny windows around the known cells instead of the full grid
    let spec = GridSpec {
        axes: vec![
            GridAxis { output: "H".into(), min: 9.9, max: 10.1 },
            GridAxis { output: "L".into(), min: 13.9, max: 14.1 },
        ],
        step: 0.1,
    };
    let mesh = mesh_grid(&game, &spec, &cfg()).unwrap();
    assert_eq!(mesh.dims(), vec![3, 3]);
    // center cell (10, 14) carries the minimized disequilibrium 175
    let center = mesh.cells[4];
    assert!((center - 175.0).abs() < 0.5, "center {center}");
    assert!((mesh.min_value - 175.0).abs() < 0.5);

    // the equilibrium cell of the asymmetric game maps to zero
    let game2 = catalog("haverly-2p-pc-cont").unwrap();
    let spec2 = GridSpec {
        axes: vec![
            GridAxis { output: "H".into(), min: 10.0, max: 10.0 },
            GridAxis { output: "L".into(), min: 15.0, max: 15.0 },
        ],
        step: 0.1,
    };
    let mesh2 = mesh_grid(&game2, &spec2, &cfg()).unwrap();
    assert!(mesh2.cells[0].abs() < 0.5, "equilibrium cell {}", mesh2.cells[0]);
}

#[test]
fn mesh_grid_rejects_zero_beta_axes() {
    let game = catalog("haverly-single").unwrap();
    let spec = GridSpec {
        axes: vec![
            GridAxis { output: "H".into(), min: 8.0, max: 10.0 },
            GridAxis { output: "L".into(), min: 14.0, max: 16.0 },
        ],
        step: 0.5,
    };
    assert!(matches!(
        mesh_grid(&game, &spec, &cfg()),
        Err(EngineError::ZeroBetaAxis(_))
    ));
}

#[test]
fn knapsack_demo_exhibits_the_kkt_gap() {
    let game = KnapsackGame::demo();
    let report = knapsack_kkt_demo(&game).unwrap();
    assert!(report.max_residual <= 1e-9);
    // every feasible profile passes the first-order system: 3 bundles per
    // player under the unit capacity
    assert_eq!(report.kkt_feasible.len(), 9);
    // the all-zeros profile is KKT-feasible yet not an equilibrium
    let zeros = vec![vec![0u8, 0u8], vec![0u8, 0u8]];
    assert!(report.kkt_feasible.contains(&zeros));
    assert!(!report.true_equilibria.contains(&zeros));
    // equilibria are a strict subset of the KKT-feasible profiles
    assert!(!report.true_equilibria.is_empty());
    assert!(report.true_equilibria.len() < report.kkt_feasible.len());
    for eq in &report.true_equilibria {
        assert!(report.kkt_feasible.contains(eq));
    }
    // the unique equilibrium: both players pick the first item
    assert_eq!(report.true_equilibria, vec![vec![vec![1, 0], vec![1, 0]]]);

    let big = KnapsackGame {
        alpha: vec![1.0; 7],
        beta: vec![0.1; 7],
        cost: vec![vec![0.0; 7]; 2],
        weight: vec![vec![1.0; 7]; 2],
        capacity: vec![3.0; 2],
    };
    assert!(matches!(knapsack_kkt_demo(&big), Err(EngineError::TooLarge(_))));
}

#[test]
fn welfare_heuristic_finds_the_two_player_equilibrium() {
    let game = catalog("haverly-2p-pc-cont").unwrap();
    let report = welfare_heuristic(&game, &cfg()).unwrap();
    assert_eq!(report.verdict, Verdict::Equilibrium);
    assert!((report.pi["H"] - 10.0).abs() < 1e-2, "pi_H {}", report.pi["H"]);
    assert!((report.pi["L"] - 15.0).abs() < 1e-2);
    assert!((report.players[0].profit - 400.0).abs() < 1e-2);
    assert!((report.players[1].profit - 325.0).abs() < 1e-2);
}

#[test]
fn wrong_modes_are_rejected() {
    let pt = catalog("haverly-2p-pc-cont").unwrap();
    let nc = catalog("haverly-2p-nc-cont").unwrap();
    assert!(matches!(welfare_heuristic(&nc, &cfg()), Err(EngineError::WrongMode(_))));
    assert!(matches!(monolithic_nc_heuristic(&pt, &cfg()), Err(EngineError::WrongMode(_))));
    assert!(matches!(jacobi(&pt, None, 1, &cfg()), Err(EngineError::WrongMode(_))));
    assert!(matches!(warmstart_pt(&nc, 1, &cfg()), Err(EngineError::WrongMode(_))));
    assert!(matches!(warmstart_nc(&pt, 1, &cfg()), Err(EngineError::WrongMode(_))));
}
