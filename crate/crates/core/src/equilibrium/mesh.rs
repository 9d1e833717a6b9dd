//! Mesh-grid map of the disequilibrium over a price grid: at each fixed
//! price vector, every player best-responds, then the coupled restriction
//! (all feasible sets plus the market-clearing rows) is maximized; the cell
//! holds the gap between the two.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{solve_subproblem, EngineConfig, EngineError, SubContext};
use crate::global::{solve_global, SolveStatus};
use crate::pooling::{
    assemble_players, price_taker_objective, Competition, GameInstance, ValueRef,
};
use crate::qcqp::{Direction, QuadExpr, Sense};

#[derive(Debug, Clone)]
pub struct GridAxis {
    pub output: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
    pub step: f64,
}

impl GridSpec {
    /// Default grid for a game: one axis per market from the lowest price the
    /// capacities can clear up to the intercept, at 10-cent steps.
    pub fn for_game(game: &GameInstance, step: f64) -> Self {
        let axes = game
            .markets_sorted()
            .into_iter()
            .map(|m| GridAxis {
                output: m.output.clone(),
                min: (m.alpha - m.beta * game.market_capacity(&m.output)).max(0.0),
                max: m.alpha,
            })
            .collect();
        GridSpec { axes, step }
    }

    pub fn axis_values(&self, i: usize) -> Vec<f64> {
        let ax = &self.axes[i];
        let n = ((ax.max - ax.min) / self.step).round() as usize;
        (0..=n).map(|k| ax.min + self.step * k as f64).collect()
    }
}

#[derive(Debug, Clone)]
pub struct MeshResult {
    /// Axis output names with their grid values, in grid order.
    pub axes: Vec<(String, Vec<f64>)>,
    /// Row-major over the cartesian product of axis values; infinite cells
    /// mark price vectors whose required demand no feasible supply meets.
    pub cells: Vec<f64>,
    pub min_value: f64,
    pub argmin: Vec<f64>,
}

impl MeshResult {
    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(|(_, v)| v.len()).collect()
    }
}

/// Disequilibrium at one fixed price vector.
fn eta_at(game: &GameInstance, prices: &BTreeMap<String, f64>, cfg: &EngineConfig) -> Result<f64, EngineError> {
    // demand each market must clear: (alpha - pi) / beta
    let mut demand = BTreeMap::new();
    for m in &game.markets {
        let d = (m.alpha - prices[&m.output]) / m.beta;
        if d < -1e-9 {
            return Ok(f64::INFINITY);
        }
        demand.insert(m.output.clone(), d.max(0.0));
    }
    // best responses; identical players share one solve
    let opts = cfg.sub_options();
    let mut dual_sum = 0.0;
    let mut solved: Vec<(usize, f64)> = Vec::new();
    for (j, p) in game.players.iter().enumerate() {
        let reuse = game.players[..j]
            .iter()
            .position(|other| other == p)
            .and_then(|i| solved.iter().find(|(k, _)| *k == i).map(|&(_, d)| d));
        let dual = match reuse {
            Some(d) => d,
            None => {
                let ctx = SubContext::PriceTaker { prices: prices.clone() };
                let s = solve_subproblem(game, j, &ctx, &opts)?;
                s.dual()
            }
        };
        solved.push((j, dual));
        dual_sum += dual;
    }
    // coupled restriction: feasible sets + exact market clearing
    let (mut model, player_vars) = assemble_players(game)?;
    let mut obj = QuadExpr::new();
    for (j, vars) in player_vars.iter().enumerate() {
        let refs: BTreeMap<String, ValueRef> = game.players[j]
            .outputs
            .iter()
            .map(|o| (o.clone(), ValueRef::Fixed(prices[o])))
            .collect();
        obj.add_expr(&price_taker_objective(&game.players[j], vars, &refs)?);
    }
    for m in &game.markets {
        let mut row = QuadExpr::new();
        for vars in &player_vars {
            if let Some(&f) = vars.f_out.get(&m.output) {
                row.add_linear(1.0, f);
            }
        }
        model.add_constraint(row, Sense::Eq, demand[&m.output], format!("clear_{}", m.output))?;
    }
    model.set_objective(obj, Direction::Max)?;
    let res = solve_global(&model, &opts);
    match res.status {
        SolveStatus::Infeasible => Ok(f64::INFINITY),
        SolveStatus::UnboundedBox => Err(EngineError::UnboundedBox),
        _ => {
            if res.point.is_none() {
                return Ok(f64::INFINITY);
            }
            Ok((dual_sum - res.primal).max(0.0))
        }
    }
}

/// Map the disequilibrium over the grid. Requires the price-taker reading
/// with consumer stationarity (the grid inverts the demand curves), and a
/// positive slope on every axis.
pub fn mesh_grid(game: &GameInstance, spec: &GridSpec, cfg: &EngineConfig) -> Result<MeshResult, EngineError> {
    if game.mode != Competition::PriceTaker {
        return Err(EngineError::WrongMode("price-taker mode"));
    }
    if cfg.consumer_explicit {
        return Err(EngineError::WrongMode("consumer stationarity embedded in the linking set"));
    }
    game.validate()?;
    for ax in &spec.axes {
        let m = game
            .market_for(&ax.output)
            .ok_or_else(|| EngineError::Pooling(crate::pooling::PoolingError::MissingPrice(ax.output.clone())))?;
        if m.beta <= 0.0 {
            return Err(EngineError::ZeroBetaAxis(ax.output.clone()));
        }
    }
    // every market must sit on some axis, otherwise its price is undefined
    for m in &game.markets {
        if !spec.axes.iter().any(|ax| ax.output == m.output) {
            return Err(EngineError::WrongMode("a grid axis per market"));
        }
    }
    let axes: Vec<(String, Vec<f64>)> = spec
        .axes
        .iter()
        .enumerate()
        .map(|(i, ax)| (ax.output.clone(), spec.axis_values(i)))
        .collect();
    let dims: Vec<usize> = axes.iter().map(|(_, v)| v.len()).collect();
    let total: usize = dims.iter().product();

    let price_at = |flat: usize| -> BTreeMap<String, f64> {
        let mut rest = flat;
        let mut prices = BTreeMap::new();
        for (dim, (name, values)) in dims.iter().zip(&axes).rev() {
            prices.insert(name.clone(), values[rest % dim]);
            rest /= dim;
        }
        prices
    };

    let cell_cfg = EngineConfig { workers: 1, ..cfg.clone() };
    let cells: Vec<f64> = cfg.pool(|| {
        (0..total)
            .into_par_iter()
            .map(|flat| eta_at(game, &price_at(flat), &cell_cfg))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut min_value = f64::INFINITY;
    let mut argmin_flat = 0;
    for (i, &v) in cells.iter().enumerate() {
        if v < min_value {
            min_value = v;
            argmin_flat = i;
        }
    }
    // report the minimizer in axis order, not name order
    let prices = price_at(argmin_flat);
    let argmin = axes.iter().map(|(name, _)| prices[name]).collect();
    Ok(MeshResult { axes, cells, min_value, argmin })
}
