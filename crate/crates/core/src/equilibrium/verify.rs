//! Candidate verification: best-respond every player against the candidate
//! and measure each disequilibrium against the dual bound.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{
    payoff_in_context, solve_subproblem, EngineConfig, EngineError, LinkingSet, PlayerReport,
    SubContext, Verdict,
};
use crate::pooling::{build_feasible_set, Competition, GameInstance};

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub players: Vec<PlayerReport>,
    pub verdict: Verdict,
}

/// Check the candidate (pi, x): every player point must be feasible and,
/// in the price-taker reading with embedded stationarity, the prices must
/// clear the markets. Disequilibrium per player is the subproblem dual
/// bound minus the achieved payoff; the verdict is Equilibrium when every
/// delta is within the (scaled) tolerance.
pub fn verify(
    game: &GameInstance,
    pi: &BTreeMap<String, f64>,
    points: &[Vec<f64>],
    cfg: &EngineConfig,
) -> Result<VerifyOutcome, EngineError> {
    game.validate()?;
    if points.len() != game.players.len() {
        return Err(EngineError::InfeasiblePoint(format!(
            "candidate has {} player points for {} players",
            points.len(),
            game.players.len()
        )));
    }
    let maps: Vec<_> = game
        .players
        .iter()
        .map(build_feasible_set)
        .collect::<Result<Vec<_>, _>>()?;
    for (j, (fs, point)) in maps.iter().zip(points).enumerate() {
        let viol = fs.model.max_scaled_violation(point)?;
        if viol > 1e-6 {
            return Err(EngineError::InfeasiblePoint(format!(
                "player {j} point violates its feasible set by {viol:.2e}"
            )));
        }
    }
    let linking = LinkingSet::for_game(game, cfg.consumer_explicit);
    if let LinkingSet::PriceTaker { stationarity: true } = linking {
        for m in &game.markets {
            let q: f64 = maps
                .iter()
                .zip(points)
                .filter_map(|(fs, p)| fs.vars.f_out.get(&m.output).map(|&f| p[f]))
                .sum();
            let implied = m.alpha - m.beta * q;
            let have = pi.get(&m.output).copied().unwrap_or(f64::NAN);
            if !(have - implied).abs().le(&(1e-6 * (1.0 + m.alpha.abs()))) {
                return Err(EngineError::InfeasiblePoint(format!(
                    "price {have} for `{}` violates stationarity (implied {implied})",
                    m.output
                )));
            }
        }
    }

    let contexts: Vec<SubContext> = match game.mode {
        Competition::PriceTaker => (0..game.players.len())
            .map(|_| SubContext::PriceTaker { prices: pi.clone() })
            .collect(),
        Competition::NashCournot => (0..game.players.len())
            .map(|j| {
                let vm: Vec<_> = maps.iter().map(|fs| fs.vars.clone()).collect();
                SubContext::NashCournot {
                    rival_totals: super::rival_totals_for(game, &vm, points, j),
                }
            })
            .collect(),
    };
    let opts = cfg.sub_options();
    let subs = cfg.pool(|| {
        contexts
            .par_iter()
            .enumerate()
            .map(|(j, ctx)| solve_subproblem(game, j, ctx, &opts))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut players = Vec::with_capacity(subs.len());
    let mut all_ok = true;
    for (j, (s, ctx)) in subs.iter().zip(&contexts).enumerate() {
        let payoff = payoff_in_context(game, j, &maps[j].vars, &points[j], ctx)?;
        let dual = s.dual();
        let mut delta = dual - payoff;
        // a feasible point can beat the dual bound only through solver
        // tolerances; tiny negatives clamp to zero
        debug_assert!(delta >= -cfg.eps * (1.0 + dual.abs()), "delta {delta} below -eps");
        if delta < 0.0 {
            delta = 0.0;
        }
        if delta > cfg.eps * (1.0 + dual.abs()) {
            all_ok = false;
        }
        let rgap = if dual.abs() <= 1e-9 { None } else { Some(delta / dual) };
        players.push(PlayerReport { profit: payoff, profit_dual_bound: dual, delta, rgap });
    }
    let verdict = if all_ok { Verdict::Equilibrium } else { Verdict::Inconclusive };
    Ok(VerifyOutcome { players, verdict })
}
