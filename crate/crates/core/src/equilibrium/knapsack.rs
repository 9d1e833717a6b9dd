//! Knapsack-player demonstration that first-order conditions certify
//! nothing under binary decisions: with the binary complementarity
//! relaxation x(1-x) = 0, EVERY feasible profile admits multipliers
//! satisfying the stationarity system, while the true equilibrium set
//! (computed by enumeration) is typically a strict subset.

use super::EngineError;
use crate::games::{brute_force_equilibria, DiscreteGame, KnapsackGame};

#[derive(Debug, Clone)]
pub struct KktDemoReport {
    /// Feasible profiles (rows = players) that pass the stationarity system.
    pub kkt_feasible: Vec<Vec<Vec<u8>>>,
    /// True pure Nash equilibria by enumeration.
    pub true_equilibria: Vec<Vec<Vec<u8>>>,
    /// Largest stationarity residual seen over all feasible profiles.
    pub max_residual: f64,
}

/// Multipliers per the closed-form recipe: knapsack multipliers zero; at
/// x = 0 the complementarity multiplier absorbs the payoff gradient, at
/// x = 1 it absorbs gradient minus the own-quantity slope term.
fn kkt_residual(game: &KnapsackGame, profile: &[Vec<u8>]) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..game.players() {
        for l in 0..game.items() {
            let rivals: f64 = (0..game.players())
                .filter(|&i| i != j)
                .map(|i| profile[i][l] as f64)
                .sum();
            let d = game.alpha[l] - game.cost[j][l] - game.beta[l] * rivals;
            let x = profile[j][l] as f64;
            let (gamma, mu, nu) = if profile[j][l] == 0 {
                ((-d), 0.0, 0.0)
            } else {
                (d - 2.0 * game.beta[l], 0.0, 0.0)
            };
            // stationarity of the relaxed Lagrangian at the binary point;
            // the knapsack multiplier is zero by the recipe, so its term
            // drops out
            let stat = d - 2.0 * game.beta[l] * x + gamma - 2.0 * gamma * x - mu + nu;
            worst = worst.max(stat.abs());
            // complementarity pieces
            worst = worst.max(gamma * x * (1.0 - x));
            worst = worst.max(mu * (1.0 - x));
            worst = worst.max(nu * x);
        }
        let used: f64 = (0..game.items())
            .map(|l| profile[j][l] as f64 * game.weight[j][l])
            .sum();
        let slack = game.capacity[j] - used;
        worst = worst.max(if slack < 0.0 { -slack } else { 0.0 });
    }
    worst
}

/// Enumerate all binary profiles of a small knapsack game: every feasible
/// profile passes the first-order system with the constructed multipliers,
/// while the enumerated equilibria form the honest comparison set.
pub fn knapsack_kkt_demo(game: &KnapsackGame) -> Result<KktDemoReport, EngineError> {
    let total_items = game.total_items();
    if total_items > 12 {
        return Err(EngineError::TooLarge(format!(
            "{total_items} binary decisions exceed the 12-item enumeration budget"
        )));
    }
    let items = game.items();
    let players = game.players();
    let mut kkt_feasible = Vec::new();
    let mut max_residual = 0.0f64;
    for bits in 0..(1u32 << total_items) {
        let profile: Vec<Vec<u8>> = (0..players)
            .map(|j| (0..items).map(|l| ((bits >> (j * items + l)) & 1) as u8).collect())
            .collect();
        if !(0..players).all(|j| game.feasible(j, &profile[j])) {
            continue;
        }
        let residual = kkt_residual(game, &profile);
        max_residual = max_residual.max(residual);
        if residual <= 1e-9 {
            kkt_feasible.push(profile);
        }
    }
    kkt_feasible.sort();

    // honest equilibrium set: strategies are the per-player feasible binary
    // bundles, deviations checked exhaustively
    let strategies: Vec<Vec<Vec<u8>>> = (0..players)
        .map(|j| {
            (0..(1u32 << items))
                .map(|bits| (0..items).map(|l| ((bits >> l) & 1) as u8).collect::<Vec<u8>>())
                .filter(|x| game.feasible(j, x))
                .collect()
        })
        .collect();
    let dg = DiscreteGame {
        strategy_counts: strategies.iter().map(|s| s.len()).collect(),
        payoff: Box::new(|p, j| {
            let profile: Vec<Vec<u8>> =
                p.iter().enumerate().map(|(i, &s)| strategies[i][s].clone()).collect();
            game.payoff(&profile, j)
        }),
    };
    let eq_indices = brute_force_equilibria(&dg)
        .map_err(|e| EngineError::TooLarge(e.to_string()))?;
    let mut true_equilibria: Vec<Vec<Vec<u8>>> = eq_indices
        .into_iter()
        .map(|idx| idx.iter().enumerate().map(|(j, &s)| strategies[j][s].clone()).collect())
        .collect();
    true_equilibria.sort();

    Ok(KktDemoReport { kkt_feasible, true_equilibria, max_residual })
}
