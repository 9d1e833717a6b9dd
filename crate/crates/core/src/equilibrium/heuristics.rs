//! Candidate-producing heuristics: the social-welfare and monolithic
//! Nash-Cournot solves (complementarity-style, verified afterwards), the
//! nonlinear Jacobi iteration, and the seeded warmstart procedures.

use std::collections::BTreeMap;

use super::verify::{verify, VerifyOutcome};
use super::{
    solve_subproblem, EngineConfig, EngineError, EquilibriumReport, StoredPoint, SubContext,
};
use crate::global::{solve_global, SolveStatus};
use crate::pooling::{
    build_feasible_set, build_monolithic_nc_model, build_welfare_model, payoff_nc, Competition,
    GameInstance,
};
use crate::rng::SeedStream;

fn heuristic_report(
    game: &GameInstance,
    pi: BTreeMap<String, f64>,
    points: Vec<Vec<f64>>,
    cfg: &EngineConfig,
) -> Result<EquilibriumReport, EngineError> {
    let VerifyOutcome { players, verdict } = verify(game, &pi, &points, cfg)?;
    let eta_ub: f64 = players.iter().map(|p| p.delta).sum();
    Ok(EquilibriumReport {
        verdict,
        eta_lb: 0.0f64.min(eta_ub),
        eta_ub,
        pi,
        players,
        player_points: points,
        iterations: Vec::new(),
        pbf: None,
        ibf: None,
        ws_cuts: Vec::new(),
        converged_within_gaps: false,
        notes: Vec::new(),
    })
}

/// Solve the maximum social welfare model, recover prices through the
/// inverse demand curves, and verify. Exact when an equilibrium exists;
/// otherwise it returns a non-equilibrium candidate without detecting the
/// non-existence, and the verdict reflects that honestly.
pub fn welfare_heuristic(game: &GameInstance, cfg: &EngineConfig) -> Result<EquilibriumReport, EngineError> {
    if game.mode != Competition::PriceTaker {
        return Err(EngineError::WrongMode("price-taker mode"));
    }
    game.validate()?;
    let welfare = build_welfare_model(game, false)?;
    let res = solve_global(&welfare.model, &cfg.rmp_options());
    match res.status {
        SolveStatus::UnboundedBox => return Err(EngineError::UnboundedBox),
        SolveStatus::Infeasible => {
            return Err(EngineError::InfeasiblePoint("welfare model infeasible".into()))
        }
        _ => {}
    }
    let point = res
        .point
        .ok_or_else(|| EngineError::InfeasiblePoint("welfare solve produced no point".into()))?;
    let points: Vec<Vec<f64>> = welfare.player_vars.iter().map(|v| v.extract(&point)).collect();
    let pi = super::implied_prices(
        game,
        &welfare.player_vars,
        &welfare.player_vars.iter().map(|_| point.clone()).collect::<Vec<_>>(),
    );
    heuristic_report(game, pi, points, cfg)
}

/// Solve the monolithic Nash-Cournot model globally (re-imposing integrality
/// when the game has fixed costs) and verify the result. Its KKT system
/// aggregates the players' ones, which is necessary but not sufficient, so
/// the verdict again comes from verification.
pub fn monolithic_nc_heuristic(
    game: &GameInstance,
    cfg: &EngineConfig,
) -> Result<EquilibriumReport, EngineError> {
    if game.mode != Competition::NashCournot {
        return Err(EngineError::WrongMode("nash-cournot mode"));
    }
    game.validate()?;
    let mono = build_monolithic_nc_model(game, game.has_binaries())?;
    let res = solve_global(&mono.model, &cfg.rmp_options());
    match res.status {
        SolveStatus::UnboundedBox => return Err(EngineError::UnboundedBox),
        SolveStatus::Infeasible => {
            return Err(EngineError::InfeasiblePoint("monolithic model infeasible".into()))
        }
        _ => {}
    }
    let point = res
        .point
        .ok_or_else(|| EngineError::InfeasiblePoint("monolithic solve produced no point".into()))?;
    let points: Vec<Vec<f64>> = mono.player_vars.iter().map(|v| v.extract(&point)).collect();
    let pi = super::implied_prices(
        game,
        &mono.player_vars,
        &mono.player_vars.iter().map(|_| point.clone()).collect::<Vec<_>>(),
    );
    heuristic_report(game, pi, points, cfg)
}

#[derive(Debug, Clone)]
pub struct JacobiReport {
    /// Payoff of every player at the start of each round.
    pub payoff_trajectory: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub converged: bool,
    pub rounds: usize,
}

/// Nonlinear Jacobi iteration: every round all players best-respond
/// simultaneously to the previous round's profile; stops when nobody's
/// payoff improves by more than eps. A fixed point is not guaranteed, and a
/// returned profile still needs verification.
pub fn jacobi(
    game: &GameInstance,
    start: Option<Vec<Vec<f64>>>,
    max_iters: usize,
    cfg: &EngineConfig,
) -> Result<JacobiReport, EngineError> {
    if game.mode != Competition::NashCournot {
        return Err(EngineError::WrongMode("nash-cournot mode"));
    }
    game.validate()?;
    let maps: Vec<_> = game
        .players
        .iter()
        .map(build_feasible_set)
        .collect::<Result<Vec<_>, _>>()?;
    let mut points: Vec<Vec<f64>> = match start {
        Some(p) => p,
        None => maps.iter().map(|fs| vec![0.0; fs.model.num_vars()]).collect(),
    };
    for (j, (fs, point)) in maps.iter().zip(&points).enumerate() {
        if fs.model.max_scaled_violation(point)? > 1e-6 {
            return Err(EngineError::InfeasiblePoint(format!("player {j} start point infeasible")));
        }
    }
    let totals = |points: &[Vec<f64>]| -> Vec<BTreeMap<String, f64>> {
        (0..game.players.len())
            .map(|j| {
                let mut t: BTreeMap<String, f64> =
                    game.markets.iter().map(|m| (m.output.clone(), 0.0)).collect();
                for (i, fs) in maps.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for (o, &f) in &fs.vars.f_out {
                        *t.get_mut(o).unwrap() += points[i][f];
                    }
                }
                t
            })
            .collect()
    };
    let mut trajectory = Vec::new();
    let mut converged = false;
    let mut rounds = 0;
    let opts = cfg.sub_options();
    for _round in 0..max_iters {
        let rivals = totals(&points);
        let current: Vec<f64> = (0..game.players.len())
            .map(|j| payoff_nc(&game.players[j], &maps[j].vars, &points[j], game, &rivals[j]))
            .collect::<Result<Vec<_>, _>>()?;
        trajectory.push(current.clone());
        let responses: Vec<_> = cfg.pool(|| {
            use rayon::prelude::*;
            (0..game.players.len())
                .into_par_iter()
                .map(|j| {
                    let ctx = SubContext::NashCournot { rival_totals: rivals[j].clone() };
                    solve_subproblem(game, j, &ctx, &opts)
                })
                .collect::<Result<Vec<_>, _>>()
        })?;
        rounds += 1;
        let improving = current
            .iter()
            .zip(&responses)
            .any(|(&cur, resp)| resp.primal() > cur + cfg.eps);
        if !improving {
            converged = true;
            break;
        }
        for (j, resp) in responses.into_iter().enumerate() {
            if let Some(p) = resp.result.point {
                points[j] = p;
            }
        }
    }
    if max_iters == 0 {
        let rivals = totals(&points);
        let current: Vec<f64> = (0..game.players.len())
            .map(|j| payoff_nc(&game.players[j], &maps[j].vars, &points[j], game, &rivals[j]))
            .collect::<Result<Vec<_>, _>>()?;
        trajectory.push(current);
    }
    Ok(JacobiReport { payoff_trajectory: trajectory, points, converged, rounds })
}

#[derive(Debug, Clone)]
pub struct PtWarmstart {
    pub prices: BTreeMap<String, f64>,
    pub points: Vec<StoredPoint>,
    pub dual_bounds: Vec<f64>,
}

/// Price-taker warmstart: draw one random price per market (in market order,
/// so parallelism cannot perturb the stream) and let every player
/// best-respond once.
pub fn warmstart_pt(game: &GameInstance, seed: u64, cfg: &EngineConfig) -> Result<PtWarmstart, EngineError> {
    if game.mode != Competition::PriceTaker {
        return Err(EngineError::WrongMode("price-taker mode"));
    }
    let mut stream = SeedStream::new(seed);
    let mut prices = BTreeMap::new();
    for m in game.markets_sorted() {
        prices.insert(m.output.clone(), m.alpha * stream.uniform(0.05, 0.95));
    }
    let opts = cfg.sub_options();
    let subs: Vec<_> = cfg.pool(|| {
        use rayon::prelude::*;
        (0..game.players.len())
            .into_par_iter()
            .map(|j| {
                let ctx = SubContext::PriceTaker { prices: prices.clone() };
                solve_subproblem(game, j, &ctx, &opts)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut points = Vec::new();
    let mut dual_bounds = Vec::new();
    for (j, s) in subs.iter().enumerate() {
        let point = s
            .point()
            .ok_or_else(|| EngineError::InfeasiblePoint(format!("warmstart subproblem {j} returned no point")))?;
        points.push(StoredPoint::from_point(&game.players[j], &s.vars, point));
        dual_bounds.push(s.dual());
    }
    Ok(PtWarmstart { prices, points, dual_bounds })
}

#[derive(Debug, Clone)]
pub struct NcWarmstart {
    pub prices: BTreeMap<String, f64>,
    /// The returned candidate profile, one stored point per player.
    pub stored: Vec<StoredPoint>,
    /// Payoff of each player at the returned profile.
    pub payoffs: Vec<f64>,
    /// Dual bound on each player's best response against the profile.
    pub dual_bounds: Vec<f64>,
}

/// Gauss-Seidel warmstart for the Nash-Cournot setting. Random prices fix
/// the last player's implied output, one Gauss-Seidel sweep produces
/// feasible responses, and a verification sweep recomputes each player
/// against exactly the rivals of the returned profile, capturing dual
/// bounds. With two players this is the classic procedure returning
/// (x1'', x2'); for more players the same two sweeps run in player order
/// (an extension, flagged in the report notes by the caller).
pub fn warmstart_nc(game: &GameInstance, seed: u64, cfg: &EngineConfig) -> Result<NcWarmstart, EngineError> {
    if game.mode != Competition::NashCournot {
        return Err(EngineError::WrongMode("nash-cournot mode"));
    }
    let n = game.players.len();
    if n < 2 {
        return Err(EngineError::WrongMode("at least two players"));
    }
    let mut stream = SeedStream::new(seed);
    let mut prices = BTreeMap::new();
    for m in game.markets_sorted() {
        prices.insert(m.output.clone(), m.alpha * stream.uniform(0.05, 0.95));
    }
    let maps: Vec<_> = game
        .players
        .iter()
        .map(build_feasible_set)
        .collect::<Result<Vec<_>, _>>()?;
    // implied outputs from the prices, split over everyone but player 1;
    // markets with beta = 0 cannot be inverted and contribute zero
    let mut profile: Vec<Vec<f64>> = maps.iter().map(|fs| vec![0.0; fs.model.num_vars()]).collect();
    for (j, fs) in maps.iter().enumerate().skip(1) {
        for (o, &f) in &fs.vars.f_out {
            let m = game.market_for(o).expect("validated");
            if m.beta > 0.0 {
                let implied = ((m.alpha - prices[o]) / m.beta).max(0.0);
                profile[j][f] = implied / (n - 1) as f64;
            }
        }
    }
    let opts = cfg.sub_options();
    let totals_around = |profile: &[Vec<f64>], j: usize| -> BTreeMap<String, f64> {
        let mut t: BTreeMap<String, f64> =
            game.markets.iter().map(|m| (m.output.clone(), 0.0)).collect();
        for (i, fs) in maps.iter().enumerate() {
            if i == j {
                continue;
            }
            for (o, &f) in &fs.vars.f_out {
                *t.get_mut(o).unwrap() += profile[i][f];
            }
        }
        t
    };
    // Gauss-Seidel sweep
    for j in 0..n {
        let ctx = SubContext::NashCournot { rival_totals: totals_around(&profile, j) };
        let s = solve_subproblem(game, j, &ctx, &opts)?;
        if let Some(p) = s.result.point {
            profile[j] = p;
        }
    }
    // verification sweep: all but the last player re-solve; the last player's
    // solve only supplies its dual bound so the returned profile keeps x_n
    // from the first sweep, matching the bound pairing
    let mut dual_bounds = vec![0.0; n];
    for j in 0..n {
        let ctx = SubContext::NashCournot { rival_totals: totals_around(&profile, j) };
        let s = solve_subproblem(game, j, &ctx, &opts)?;
        dual_bounds[j] = s.dual();
        if j + 1 < n {
            if let Some(p) = s.result.point {
                profile[j] = p;
            }
        }
    }
    let mut payoffs = Vec::with_capacity(n);
    for j in 0..n {
        let rivals = totals_around(&profile, j);
        payoffs.push(payoff_nc(&game.players[j], &maps[j].vars, &profile[j], game, &rivals)?);
    }
    let stored = (0..n)
        .map(|j| StoredPoint::from_point(&game.players[j], &maps[j].vars, &profile[j]))
        .collect();
    Ok(NcWarmstart { prices, stored, payoffs, dual_bounds })
}
