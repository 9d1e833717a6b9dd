//! Minimal non-pooling games exhibiting the negative results: first-order
//! conditions that admit non-equilibria, and a monolithic model whose
//! optimum diverges with the box while the true equilibrium sits at zero.

use serde::{Deserialize, Serialize};

use crate::global::{solve_global, SolveOptions, SolveStatus};
use crate::qcqp::{Direction, QcqpModel, QuadExpr, VarKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GamesError {
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// Two players, each minimizing the product of its own decision with the
/// rival's, over a symmetric box [-m, m]. The unboxed game has the unique
/// equilibrium (0, 0), yet the monolithic model min x1*x2 is unbounded
/// without a box and its boxed optimum -m^2 diverges as the box grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBilinearGame {
    pub m: f64,
}

impl BoxBilinearGame {
    /// min x1*x2 over the box; without a box (m infinite) the solver reports
    /// an unbounded box instead of an optimum.
    pub fn monolithic_model(&self) -> QcqpModel {
        let mut model = QcqpModel::new(Direction::Min);
        let bound = if self.m.is_finite() { self.m } else { f64::INFINITY };
        let x1 = model.add_variable(-bound, bound, VarKind::Continuous).unwrap();
        let x2 = model.add_variable(-bound, bound, VarKind::Continuous).unwrap();
        let mut obj = QuadExpr::new();
        obj.add_bilinear(1.0, x1, x2);
        model.set_objective(obj, Direction::Min).unwrap();
        model
    }

    /// Player j's payoff (minimization): x_j * x_rival.
    pub fn cost(&self, own: f64, rival: f64) -> f64 {
        own * rival
    }

    /// Best achievable cost for a player given the rival's decision.
    pub fn best_response_cost(&self, rival: f64) -> f64 {
        // minimize own*rival over own in [-m, m]
        -(self.m * rival.abs())
    }

    /// Disequilibrium of a profile: per player, current cost minus the best
    /// response cost (nonnegative; zero for both iff the profile is an
    /// equilibrium of the boxed game).
    pub fn deltas(&self, x1: f64, x2: f64) -> (f64, f64) {
        (
            self.cost(x1, x2) - self.best_response_cost(x2),
            self.cost(x2, x1) - self.best_response_cost(x1),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxGameRow {
    pub m: f64,
    pub monolithic_optimum: f64,
    pub monolithic_point: (f64, f64),
    /// Disequilibrium of the monolithic optimizer under the box.
    pub monolithic_deltas: (f64, f64),
    /// Disequilibrium of the origin under the box (always zero).
    pub origin_deltas: (f64, f64),
}

/// For each box size: solve the monolithic model (optimum -m^2, diverging in
/// m), and report best-response checks of both the origin and the monolithic
/// optimizer. The origin stays an equilibrium under every box, which is what
/// the diverging monolithic optima obscure.
pub fn appendix_b_demo(m_list: &[f64]) -> Vec<BoxGameRow> {
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let game = BoxBilinearGame { m };
        let res = solve_global(&game.monolithic_model(), &SolveOptions::default());
        assert_eq!(res.status, SolveStatus::Optimal, "boxed model must solve");
        let p = res.point.expect("optimal has a point");
        rows.push(BoxGameRow {
            m,
            monolithic_optimum: res.primal,
            monolithic_point: (p[0], p[1]),
            monolithic_deltas: game.deltas(p[0], p[1]),
            origin_deltas: game.deltas(0.0, 0.0),
        });
    }
    rows
}

/// A finite game in normal form: per player a strategy count and a payoff
/// function over full profiles.
pub struct DiscreteGame<'a> {
    pub strategy_counts: Vec<usize>,
    #[allow(clippy::type_complexity)]
    pub payoff: Box<dyn Fn(&[usize], usize) -> f64 + Sync + 'a>,
}

/// Exact pure Nash equilibria by checking every unilateral deviation.
/// Ties count as equilibria (weak Nash). Profiles come back in
/// lexicographic order.
pub fn brute_force_equilibria(game: &DiscreteGame) -> Result<Vec<Vec<usize>>, GamesError> {
    let total: usize = game.strategy_counts.iter().try_fold(1usize, |acc, &n| {
        acc.checked_mul(n).filter(|&t| t <= 1 << 20)
    }).ok_or_else(|| GamesError::TooLarge("more than 2^20 strategy profiles".into()))?;
    let n_players = game.strategy_counts.len();
    let profile_of = |mut flat: usize| -> Vec<usize> {
        let mut p = vec![0; n_players];
        for j in (0..n_players).rev() {
            p[j] = flat % game.strategy_counts[j];
            flat /= game.strategy_counts[j];
        }
        p
    };
    use rayon::prelude::*;
    let mut found: Vec<Vec<usize>> = (0..total)
        .into_par_iter()
        .filter_map(|flat| {
            let profile = profile_of(flat);
            for j in 0..n_players {
                let here = (game.payoff)(&profile, j);
                let mut trial = profile.clone();
                for s in 0..game.strategy_counts[j] {
                    if s == profile[j] {
                        continue;
                    }
                    trial[j] = s;
                    if (game.payoff)(&trial, j) > here {
                        return None;
                    }
                }
                trial[j] = profile[j];
            }
            Some(profile)
        })
        .collect();
    found.sort();
    Ok(found)
}

/// Binary knapsack players competing through linear inverse demand markets:
/// player j picks items, item l of every player sells into market l.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackGame {
    /// Market intercepts, one per item index.
    pub alpha: Vec<f64>,
    /// Market slopes, one per item index.
    pub beta: Vec<f64>,
    /// Per player: participation costs per item.
    pub cost: Vec<Vec<f64>>,
    /// Per player: resource use per item.
    pub weight: Vec<Vec<f64>>,
    /// Per player: knapsack capacity.
    pub capacity: Vec<f64>,
}

impl KnapsackGame {
    pub fn players(&self) -> usize {
        self.cost.len()
    }

    pub fn items(&self) -> usize {
        self.alpha.len()
    }

    pub fn total_items(&self) -> usize {
        self.players() * self.items()
    }

    pub fn feasible(&self, j: usize, x: &[u8]) -> bool {
        let used: f64 = x
            .iter()
            .zip(&self.weight[j])
            .map(|(&b, &w)| b as f64 * w)
            .sum();
        used <= self.capacity[j] + 1e-12
    }

    /// Payoff of player j at a full profile (rows = players).
    pub fn payoff(&self, profile: &[Vec<u8>], j: usize) -> f64 {
        (0..self.items())
            .map(|l| {
                let total: f64 = profile.iter().map(|p| p[l] as f64).sum();
                let own = profile[j][l] as f64;
                (self.alpha[l] - self.beta[l] * total) * own - self.cost[j][l] * own
            })
            .sum()
    }

    /// The bundled two-player demonstration instance: two items each, one
    /// knapsack slot per player.
    pub fn demo() -> Self {
        KnapsackGame {
            alpha: vec![10.0, 8.0],
            beta: vec![1.0, 1.0],
            cost: vec![vec![2.0, 2.0], vec![2.0, 2.0]],
            weight: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            capacity: vec![1.0, 1.0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_b_optima_diverge_while_origin_stays_an_equilibrium() {
        let rows = appendix_b_demo(&[1.0, 10.0, 100.0]);
        let expected = [-1.0, -100.0, -10000.0];
        for (row, want) in rows.iter().zip(expected) {
            assert!((row.monolithic_optimum - want).abs() < 1e-6 * (1.0 + want.abs()));
            assert!((row.origin_deltas.0).abs() < 1e-12);
            assert!((row.origin_deltas.1).abs() < 1e-12);
            // corner (−m, m) is a best response pair under the box, so the
            // monolithic point reports zero deltas as well; what diverges is
            // its objective
            assert!(row.monolithic_deltas.0 <= 1e-6 * (1.0 + want.abs()));
            assert!(row.monolithic_deltas.1 <= 1e-6 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn unboxed_monolithic_model_reports_unbounded_box() {
        let game = BoxBilinearGame { m: f64::INFINITY };
        let res = solve_global(&game.monolithic_model(), &SolveOptions::default());
        assert_eq!(res.status, SolveStatus::UnboundedBox);
    }

    #[test]
    fn brute_force_finds_dominant_strategy_profile() {
        // prisoner's-dilemma payoffs: defect (1) dominates
        let table = [[(-1.0, -1.0), (-3.0, 0.0)], [(0.0, -3.0), (-2.0, -2.0)]];
        let game = DiscreteGame {
            strategy_counts: vec![2, 2],
            payoff: Box::new(move |p, j| {
                let cell = table[p[0]][p[1]];
                if j == 0 {
                    cell.0
                } else {
                    cell.1
                }
            }),
        };
        assert_eq!(brute_force_equilibria(&game).unwrap(), vec![vec![1, 1]]);
    }

    #[test]
    fn matching_pennies_has_no_pure_equilibrium() {
        let game = DiscreteGame {
            strategy_counts: vec![2, 2],
            payoff: Box::new(|p, j| {
                let agree = p[0] == p[1];
                match (j, agree) {
                    (0, true) => 1.0,
                    (0, false) => -1.0,
                    (_, true) => -1.0,
                    (_, false) => 1.0,
                }
            }),
        };
        assert!(brute_force_equilibria(&game).unwrap().is_empty());
    }

    #[test]
    fn too_large_games_are_rejected() {
        let game = DiscreteGame {
            strategy_counts: vec![2; 21],
            payoff: Box::new(|_, _| 0.0),
        };
        assert!(matches!(brute_force_equilibria(&game), Err(GamesError::TooLarge(_))));
    }

    #[test]
    fn equilibria_survive_an_independent_deviation_recheck() {
        let dg = DiscreteGame {
            strategy_counts: vec![3; 2],
            payoff: Box::new(|p, j| {
                let strategies = [vec![0u8, 0], vec![1, 0], vec![0, 1]];
                let profile: Vec<Vec<u8>> = p.iter().map(|&s| strategies[s].clone()).collect();
                KnapsackGame::demo().payoff(&profile, j)
            }),
        };
        let eqs = brute_force_equilibria(&dg).unwrap();
        assert!(!eqs.is_empty());
        for eq in &eqs {
            for j in 0..2 {
                let here = (dg.payoff)(eq, j);
                for s in 0..dg.strategy_counts[j] {
                    let mut trial = eq.clone();
                    trial[j] = s;
                    assert!((dg.payoff)(&trial, j) <= here + 1e-12);
                }
            }
        }
    }
}
