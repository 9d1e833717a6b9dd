//! The relaxed master problem: all players' feasible sets, the linking rows,
//! the lifted payoff variables w_j, and one equilibrium cut per stored point.

use std::collections::BTreeMap;

use super::{CutPool, EngineError, LinkingSet};
use crate::pooling::{
    assemble_players, nash_cournot_objective, price_taker_objective, GameInstance, ValueRef, VarMap,
};
use crate::qcqp::{Direction, QcqpModel, QuadExpr, Sense, VarId};

#[derive(Debug, Clone)]
pub struct RmpModel {
    pub model: QcqpModel,
    pub player_vars: Vec<VarMap>,
    /// Lifted optimal-payoff variable per player.
    pub w: Vec<VarId>,
    /// Price variable per market (price-taker linking only).
    pub pi: BTreeMap<String, VarId>,
    /// Consumed quantity per market (price-taker linking only).
    pub q: BTreeMap<String, VarId>,
    /// Lifted consumer-surplus variable (explicit-consumer runs only).
    pub w_consumer: Option<VarId>,
}

impl RmpModel {
    pub fn extract_pi(&self, point: &[f64], game: &GameInstance) -> BTreeMap<String, f64> {
        if self.pi.is_empty() {
            super::implied_prices(
                game,
                &self.player_vars,
                &self
                    .player_vars
                    .iter()
                    .map(|_| point.to_vec())
                    .collect::<Vec<_>>(),
            )
        } else {
            self.pi.iter().map(|(o, &v)| (o.clone(), point[v])).collect()
        }
    }
}

/// Upper box for w_j: revenue can never exceed price intercept times output
/// capacity, so the intercepts bound the lifted payoffs.
fn payoff_cap(game: &GameInstance, player: usize) -> f64 {
    game.players[player]
        .outputs
        .iter()
        .filter_map(|o| game.market_for(o).map(|m| m.alpha * game.players[player].fmax(o)))
        .sum()
}

pub fn build_rmp(
    game: &GameInstance,
    linking: LinkingSet,
    cuts: &CutPool,
) -> Result<RmpModel, EngineError> {
    for (j, pool) in cuts.per_player.iter().enumerate() {
        if pool.is_empty() {
            return Err(EngineError::EmptyCutPool(j));
        }
    }
    let (mut model, player_vars) = assemble_players(game)?;

    let mut w = Vec::with_capacity(game.players.len());
    for j in 0..game.players.len() {
        let cap = payoff_cap(game, j);
        w.push(model.add_variable(0.0, cap, crate::qcqp::VarKind::Continuous)?);
    }

    let mut pi = BTreeMap::new();
    let mut q = BTreeMap::new();
    let mut w_consumer = None;
    match linking {
        LinkingSet::NashCournot => {}
        LinkingSet::PriceTaker { stationarity } => {
            for m in game.markets_sorted() {
                // prices above the demand intercept or below zero are
                // economically vacuous; this box also feeds McCormick
                let pv = model.add_variable(0.0, m.alpha, crate::qcqp::VarKind::Continuous)?;
                pi.insert(m.output.clone(), pv);
                let cap = game.market_capacity(&m.output);
                let qv = model.add_variable(0.0, cap, crate::qcqp::VarKind::Continuous)?;
                q.insert(m.output.clone(), qv);
                let mut link = QuadExpr::new();
                link.add_linear(1.0, qv);
                for vars in &player_vars {
                    if let Some(&f) = vars.f_out.get(&m.output) {
                        link.add_linear(-1.0, f);
                    }
                }
                model.add_constraint(link, Sense::Eq, 0.0, format!("link_{}", m.output))?;
                if stationarity {
                    let mut st = QuadExpr::new();
                    st.add_linear(1.0, pv).add_linear(m.beta, qv);
                    model.add_constraint(st, Sense::Eq, m.alpha, format!("stat_{}", m.output))?;
                }
            }
            if !stationarity {
                // explicit consumer: its surplus gets lifted like a player's
                let cap: f64 = game
                    .markets
                    .iter()
                    .map(|m| m.alpha * game.market_capacity(&m.output))
                    .sum();
                w_consumer = Some(model.add_variable(0.0, cap, crate::qcqp::VarKind::Continuous)?);
            }
        }
    }

    // equilibrium cuts: w_j >= payoff of the stored point under the current
    // prices (price taker) or the current rival outputs (Nash-Cournot)
    for (j, pool) in cuts.per_player.iter().enumerate() {
        for (k, stored) in pool.iter().enumerate() {
            let mut cut = QuadExpr::new();
            cut.add_linear(1.0, w[j]);
            let mut rhs = -stored.cost;
            match linking {
                LinkingSet::PriceTaker { .. } => {
                    for (o, &f_bar) in &stored.f_out {
                        if f_bar != 0.0 {
                            cut.add_linear(-f_bar, pi[o]);
                        }
                    }
                }
                LinkingSet::NashCournot => {
                    for (o, &f_bar) in &stored.f_out {
                        let m = game.market_for(o).expect("validated");
                        rhs += m.alpha * f_bar - m.beta * f_bar * f_bar;
                        if m.beta != 0.0 && f_bar != 0.0 {
                            for (i, vars) in player_vars.iter().enumerate() {
                                if i == j {
                                    continue;
                                }
                                if let Some(&f) = vars.f_out.get(o) {
                                    cut.add_linear(m.beta * f_bar, f);
                                }
                            }
                        }
                    }
                }
            }
            model.add_constraint(cut, Sense::Ge, rhs, format!("cut_p{j}_{k}"))?;
        }
    }
    if let Some(wc) = w_consumer {
        for (k, q_bar) in cuts.consumer.iter().enumerate() {
            // w_c >= sum alpha q - beta q^2 / 2 - pi q at fixed q
            let mut cut = QuadExpr::new();
            cut.add_linear(1.0, wc);
            let mut rhs = 0.0;
            for m in &game.markets {
                let qb = q_bar.get(&m.output).copied().unwrap_or(0.0);
                rhs += m.alpha * qb - 0.5 * m.beta * qb * qb;
                if qb != 0.0 {
                    cut.add_linear(qb, pi[&m.output]);
                }
            }
            model.add_constraint(cut, Sense::Ge, rhs, format!("cut_consumer_{k}"))?;
        }
    }

    // objective: minimize total disequilibrium sum_j (w_j - p_j(x_j, pi))
    let mut obj = QuadExpr::new();
    for &wj in &w {
        obj.add_linear(1.0, wj);
    }
    for (j, vars) in player_vars.iter().enumerate() {
        let payoff = match linking {
            LinkingSet::PriceTaker { .. } => {
                let refs: BTreeMap<String, ValueRef> = game
                    .players[j]
                    .outputs
                    .iter()
                    .map(|o| (o.clone(), ValueRef::Var(pi[o])))
                    .collect();
                price_taker_objective(&game.players[j], vars, &refs)?
            }
            LinkingSet::NashCournot => {
                let mut rivals: BTreeMap<String, Vec<ValueRef>> = BTreeMap::new();
                for (i, other) in player_vars.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for (o, &f) in &other.f_out {
                        rivals.entry(o.clone()).or_default().push(ValueRef::Var(f));
                    }
                }
                nash_cournot_objective(&game.players[j], vars, game, &rivals)?
            }
        };
        obj.add_expr(&payoff.scaled(-1.0));
    }
    if let Some(wc) = w_consumer {
        obj.add_linear(1.0, wc);
        for m in &game.markets {
            // minus consumer surplus in (q, pi) variables
            let qv = q[&m.output];
            obj.add_linear(-m.alpha, qv);
            obj.add_bilinear(0.5 * m.beta, qv, qv);
            obj.add_bilinear(1.0, pi[&m.output], qv);
        }
    }
    model.set_objective(obj, Direction::Min)?;

    Ok(RmpModel { model, player_vars, w, pi, q, w_consumer })
}
