//! The game-theoretic layer: the cutting-plane minimum-disequilibrium
//! algorithm with equilibrium cuts, linking sets, warmstarts, the
//! complementarity-style heuristics, equilibrium verification, the mesh-grid
//! disequilibrium map, and the knapsack KKT demonstration.

mod algorithm;
mod heuristics;
mod knapsack;
mod mesh;
pub mod rmp;
mod verify;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::global::{solve_global, SolveOptions, SolveResult, SolveStatus};
use crate::pooling::{
    build_feasible_set, nash_cournot_objective, payoff_nc, payoff_pt, price_taker_objective,
    Competition, GameInstance, PoolingError, PoolingInstance, ValueRef, VarMap,
};
use crate::qcqp::{Direction, QcqpError, QcqpModel};

pub use algorithm::min_disequilibrium;
pub use heuristics::{
    jacobi, monolithic_nc_heuristic, warmstart_nc, warmstart_pt, welfare_heuristic, JacobiReport,
    NcWarmstart, PtWarmstart,
};
pub use knapsack::{knapsack_kkt_demo, KktDemoReport};
pub use mesh::{mesh_grid, GridAxis, GridSpec, MeshResult};
pub use rmp::{build_rmp, RmpModel};
pub use verify::{verify, VerifyOutcome};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("cut pool has no stored point for player {0}")]
    EmptyCutPool(usize),
    #[error("candidate point rejected: {0}")]
    InfeasiblePoint(String),
    #[error("grid axis `{0}` has beta = 0; consumer stationarity cannot be inverted")]
    ZeroBetaAxis(String),
    #[error("operation requires {0}")]
    WrongMode(&'static str),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("model is unbounded over the given boxes")]
    UnboundedBox,
    #[error(transparent)]
    Pooling(#[from] PoolingError),
    #[error(transparent)]
    Model(#[from] QcqpError),
}

/// Engine-wide run parameters. The equilibrium tolerance is absolute, in
/// instance currency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineConfig {
    pub eps: f64,
    pub rel_gap: f64,
    pub rmp_time_limit_s: f64,
    pub sub_time_limit_s: f64,
    pub max_iters: usize,
    pub early_stop_on_positive_lb: bool,
    pub warmstart_seeds: Vec<u64>,
    /// Expose the consumer as an explicit player instead of embedding its
    /// stationarity conditions in the linking set.
    pub consumer_explicit: bool,
    pub workers: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            eps: 1e-3,
            rel_gap: 1e-4,
            rmp_time_limit_s: 600.0,
            sub_time_limit_s: 60.0,
            max_iters: 30,
            early_stop_on_positive_lb: false,
            warmstart_seeds: Vec::new(),
            consumer_explicit: false,
            workers: 1,
        }
    }
}

impl EngineConfig {
    pub fn sub_options(&self) -> SolveOptions {
        SolveOptions {
            rel_gap: self.rel_gap,
            time_limit: Some(Duration::from_secs_f64(self.sub_time_limit_s)),
            ..SolveOptions::default()
        }
    }

    pub fn rmp_options(&self) -> SolveOptions {
        SolveOptions {
            rel_gap: self.rel_gap,
            time_limit: Some(Duration::from_secs_f64(self.rmp_time_limit_s)),
            ..SolveOptions::default()
        }
    }

    pub(crate) fn pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .expect("thread pool")
            .install(f)
    }
}

/// The coupling between prices and player decisions. In the Nash-Cournot
/// reading the "prices" are the players' own decisions; in the price-taker
/// reading a shared quantity clears each market, optionally with the
/// consumer's stationarity conditions embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkingSet {
    NashCournot,
    PriceTaker { stationarity: bool },
}

impl LinkingSet {
    pub fn for_game(game: &GameInstance, consumer_explicit: bool) -> Self {
        match game.mode {
            Competition::NashCournot => LinkingSet::NashCournot,
            Competition::PriceTaker => LinkingSet::PriceTaker { stationarity: !consumer_explicit },
        }
    }
}

/// A stored feasible point of one player, kept with the pieces its
/// equilibrium cut needs: output flows and total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredPoint {
    pub x: Vec<f64>,
    pub f_out: BTreeMap<String, f64>,
    pub cost: f64,
}

impl StoredPoint {
    pub fn from_point(player: &PoolingInstance, vars: &VarMap, point: &[f64]) -> Self {
        StoredPoint {
            x: point.to_vec(),
            f_out: vars.output_values(point),
            cost: vars.cost_value(player, point),
        }
    }
}

/// Per-player sets of stored feasible points, used as equilibrium cuts.
/// Always seeded with the shut-down point, so w_j >= 0 is valid from the
/// start and the first master problem is bounded.
#[derive(Debug, Clone)]
pub struct CutPool {
    pub per_player: Vec<Vec<StoredPoint>>,
    /// Stored consumer quantities (explicit-consumer runs only).
    pub consumer: Vec<BTreeMap<String, f64>>,
}

impl CutPool {
    pub fn seeded(game: &GameInstance) -> Result<Self, EngineError> {
        let mut per_player = Vec::with_capacity(game.players.len());
        for p in &game.players {
            let fs = build_feasible_set(p)?;
            let zeros = vec![0.0; fs.model.num_vars()];
            per_player.push(vec![StoredPoint::from_point(p, &fs.vars, &zeros)]);
        }
        let consumer = vec![game.markets.iter().map(|m| (m.output.clone(), 0.0)).collect()];
        Ok(CutPool { per_player, consumer })
    }

    /// Append a point unless an equal one (sup-norm 1e-9) is already stored.
    pub fn add(&mut self, player: usize, point: StoredPoint) -> bool {
        let exists = self.per_player[player].iter().any(|s| {
            s.x.len() == point.x.len()
                && s.x.iter().zip(&point.x).all(|(a, b)| (a - b).abs() <= 1e-9)
        });
        if exists {
            false
        } else {
            self.per_player[player].push(point);
            true
        }
    }

    pub fn total(&self) -> usize {
        self.per_player.iter().map(|v| v.len()).sum::<usize>() + self.consumer.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equilibrium,
    NoEquilibriumCertified,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Warmstart,
    Standard,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlayerReport {
    /// Profit at the reported candidate.
    pub profit: f64,
    /// Dual (upper) bound on the player's best achievable profit.
    pub profit_dual_bound: f64,
    /// Disequilibrium: dual bound minus achieved profit.
    pub delta: f64,
    /// Relative disequilibrium gap delta / dual bound; None encodes the 0/0
    /// convention when the dual bound is zero.
    pub rgap: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterRow {
    pub iter: usize,
    pub eta_lb: f64,
    pub eta_ub: f64,
    pub master_time_s: f64,
    pub sub_time_s: f64,
    pub cuts_total: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub verdict: Verdict,
    pub eta_lb: f64,
    pub eta_ub: f64,
    /// Market prices of the reported candidate (derived from quantities in
    /// the Nash-Cournot reading).
    pub pi: BTreeMap<String, f64>,
    pub players: Vec<PlayerReport>,
    /// Candidate point per player, in that player's feasible-set variables.
    pub player_points: Vec<Vec<f64>>,
    pub iterations: Vec<IterRow>,
    /// Phase and iteration in which the reported candidate was found; 0 with
    /// Warmstart means it came out of the warmstart phase.
    pub pbf: Option<Phase>,
    pub ibf: Option<usize>,
    /// Warmstart cuts generated per player.
    pub ws_cuts: Vec<usize>,
    /// Bounds met the tolerance only after widening by the inner solver gaps.
    pub converged_within_gaps: bool,
    pub notes: Vec<String>,
}

impl EquilibriumReport {
    pub fn max_delta(&self) -> f64 {
        self.players.iter().map(|p| p.delta).fold(0.0, f64::max)
    }
}

/// Context a subproblem is solved against: fixed prices for a price taker,
/// fixed total rival quantities per market for a Nash-Cournot player.
#[derive(Debug, Clone)]
pub enum SubContext {
    PriceTaker { prices: BTreeMap<String, f64> },
    NashCournot { rival_totals: BTreeMap<String, f64> },
}

#[derive(Debug)]
pub struct SubproblemOutcome {
    pub result: SolveResult,
    pub vars: VarMap,
    pub model: QcqpModel,
}

impl SubproblemOutcome {
    /// Primal payoff (best found); minus infinity when no point exists.
    pub fn primal(&self) -> f64 {
        self.result.primal
    }

    /// Valid upper bound on the player's optimal payoff.
    pub fn dual(&self) -> f64 {
        self.result.dual
    }

    pub fn point(&self) -> Option<&[f64]> {
        self.result.point.as_deref()
    }

    pub fn hit_limit(&self) -> bool {
        matches!(self.result.status, SolveStatus::TimeLimit | SolveStatus::GapLimit)
    }
}

/// Build and globally solve player j's profit maximization in the given
/// context. Used both for cut generation and for verification bounds.
pub fn solve_subproblem(
    game: &GameInstance,
    player: usize,
    ctx: &SubContext,
    opts: &SolveOptions,
) -> Result<SubproblemOutcome, EngineError> {
    let p = &game.players[player];
    let fs = build_feasible_set(p)?;
    let mut model = fs.model;
    let objective = match ctx {
        SubContext::PriceTaker { prices } => {
            let refs: BTreeMap<String, ValueRef> =
                prices.iter().map(|(o, &v)| (o.clone(), ValueRef::Fixed(v))).collect();
            price_taker_objective(p, &fs.vars, &refs)?
        }
        SubContext::NashCournot { rival_totals } => {
            let rivals: BTreeMap<String, Vec<ValueRef>> = rival_totals
                .iter()
                .map(|(o, &v)| (o.clone(), vec![ValueRef::Fixed(v)]))
                .collect();
            nash_cournot_objective(p, &fs.vars, game, &rivals)?
        }
    };
    model.set_objective(objective, Direction::Max)?;
    let result = solve_global(&model, opts);
    Ok(SubproblemOutcome { result, vars: fs.vars, model })
}

/// Payoff of a concrete player point in a concrete context.
pub fn payoff_in_context(
    game: &GameInstance,
    player: usize,
    vars: &VarMap,
    point: &[f64],
    ctx: &SubContext,
) -> Result<f64, EngineError> {
    let p = &game.players[player];
    let v = match ctx {
        SubContext::PriceTaker { prices } => payoff_pt(p, vars, point, prices)?,
        SubContext::NashCournot { rival_totals } => payoff_nc(p, vars, point, game, rival_totals)?,
    };
    Ok(v)
}

/// Total rival output per market, given every player's point.
pub fn rival_totals_for(
    game: &GameInstance,
    maps: &[VarMap],
    points: &[Vec<f64>],
    player: usize,
) -> BTreeMap<String, f64> {
    let mut totals: BTreeMap<String, f64> = game.markets.iter().map(|m| (m.output.clone(), 0.0)).collect();
    for (i, (vars, point)) in maps.iter().zip(points).enumerate() {
        if i == player {
            continue;
        }
        for (o, &f) in &vars.f_out {
            if let Some(t) = totals.get_mut(o) {
                *t += point[f];
            }
        }
    }
    totals
}

/// Market prices implied by total supply through the inverse demand curves.
pub fn implied_prices(game: &GameInstance, maps: &[VarMap], points: &[Vec<f64>]) -> BTreeMap<String, f64> {
    game.markets
        .iter()
        .map(|m| {
            let q: f64 = maps
                .iter()
                .zip(points)
                .filter_map(|(vars, point)| vars.f_out.get(&m.output).map(|&f| point[f]))
                .sum();
            (m.output.clone(), m.alpha - m.beta * q)
        })
        .collect()
}

#[cfg(test)]
mod tests;
