//! The cutting-plane loop that minimizes total disequilibrium: solve the
//! relaxed master for a candidate and a lower bound, best-respond every
//! player against the candidate, accept if the lifted payoffs already cover
//! the best responses, otherwise add the responses as cuts and tighten the
//! upper bound. A strictly positive lower bound certifies that no
//! equilibrium exists.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::rmp::build_rmp;
use super::{
    heuristics, payoff_in_context, rival_totals_for, solve_subproblem, CutPool, EngineConfig,
    EngineError, EquilibriumReport, IterRow, LinkingSet, Phase, PlayerReport, StoredPoint,
    SubContext, SubproblemOutcome, Verdict,
};
use crate::global::SolveStatus;
use crate::pooling::{Competition, GameInstance};

struct Candidate {
    pi: BTreeMap<String, f64>,
    points: Vec<Vec<f64>>,
    payoffs: Vec<f64>,
    dual_bounds: Vec<f64>,
    eta: f64,
    phase: Phase,
    iter_found: usize,
}

fn player_report(c: &Candidate) -> Vec<PlayerReport> {
    c.payoffs
        .iter()
        .zip(&c.dual_bounds)
        .map(|(&p, &u)| {
            let delta = (u - p).max(0.0);
            let rgap = if u.abs() <= 1e-9 { None } else { Some(delta / u) };
            PlayerReport { profit: p, profit_dual_bound: u, delta, rgap }
        })
        .collect()
}

/// Best-respond every player against the candidate context; player order is
/// preserved regardless of worker count.
fn solve_all_subproblems(
    game: &GameInstance,
    cfg: &EngineConfig,
    contexts: &[SubContext],
) -> Result<Vec<SubproblemOutcome>, EngineError> {
    let opts = cfg.sub_options();
    cfg.pool(|| {
        contexts
            .par_iter()
            .enumerate()
            .map(|(j, ctx)| solve_subproblem(game, j, ctx, &opts))
            .collect::<Result<Vec<_>, _>>()
    })
}

/// Per-player context at a master candidate: prices for price takers, total
/// rival quantities per market for Nash-Cournot players.
fn contexts_at(
    game: &GameInstance,
    pi: &BTreeMap<String, f64>,
    maps: &[crate::pooling::VarMap],
    points: &[Vec<f64>],
) -> Vec<SubContext> {
    match game.mode {
        Competition::PriceTaker => (0..game.players.len())
            .map(|_| SubContext::PriceTaker { prices: pi.clone() })
            .collect(),
        Competition::NashCournot => (0..game.players.len())
            .map(|j| SubContext::NashCournot { rival_totals: rival_totals_for(game, maps, points, j) })
            .collect(),
    }
}

pub fn min_disequilibrium(
    game: &GameInstance,
    cfg: &EngineConfig,
) -> Result<EquilibriumReport, EngineError> {
    game.validate()?;
    let linking = LinkingSet::for_game(game, cfg.consumer_explicit);
    let mut cuts = CutPool::seeded(game)?;
    let mut notes = Vec::new();
    let mut ws_cuts = vec![0usize; game.players.len()];

    // warmstart phase: seeded heuristics pre-populate the cut pool and, in
    // the Nash-Cournot setting, may already deliver a verified equilibrium
    let mut best: Option<Candidate> = None;
    for &seed in &cfg.warmstart_seeds {
        match game.mode {
            Competition::PriceTaker => {
                let ws = heuristics::warmstart_pt(game, seed, cfg)?;
                for (j, point) in ws.points.into_iter().enumerate() {
                    if cuts.add(j, point) {
                        ws_cuts[j] += 1;
                    }
                }
            }
            Competition::NashCournot => {
                let ws = heuristics::warmstart_nc(game, seed, cfg)?;
                for (j, stored) in ws.stored.iter().enumerate() {
                    if cuts.add(j, stored.clone()) {
                        ws_cuts[j] += 1;
                    }
                }
                let eta: f64 = ws
                    .dual_bounds
                    .iter()
                    .zip(&ws.payoffs)
                    .map(|(&u, &p)| (u - p).max(0.0))
                    .sum();
                let better = best.as_ref().map_or(true, |b| eta < b.eta);
                if better {
                    best = Some(Candidate {
                        pi: ws.prices.clone(),
                        points: ws.stored.iter().map(|s| s.x.clone()).collect(),
                        payoffs: ws.payoffs.clone(),
                        dual_bounds: ws.dual_bounds.clone(),
                        eta,
                        phase: Phase::Warmstart,
                        iter_found: 0,
                    });
                }
            }
        }
    }

    let mut eta_lb = f64::NEG_INFINITY;
    let mut eta_ub = best.as_ref().map_or(f64::INFINITY, |b| b.eta);
    let mut iterations: Vec<IterRow> = Vec::new();
    let mut converged_within_gaps = false;

    // a warmstart candidate can already be an epsilon-equilibrium
    if let Some(b) = &best {
        let max_delta = b
            .payoffs
            .iter()
            .zip(&b.dual_bounds)
            .map(|(&p, &u)| u - p)
            .fold(f64::NEG_INFINITY, f64::max);
        if max_delta <= cfg.eps {
            let report = finish(Verdict::Equilibrium, 0.0_f64.min(eta_ub), eta_ub, best.unwrap(), iterations, ws_cuts, converged_within_gaps, notes);
            return Ok(report);
        }
    }

    let mut verdict = Verdict::Inconclusive;
    for iter in 1..=cfg.max_iters {
        // master
        let master_start = Instant::now();
        let rmp = build_rmp(game, linking, &cuts)?;
        let master = crate::global::solve_global(&rmp.model, &cfg.rmp_options());
        let master_time = master_start.elapsed().as_secs_f64();
        if std::env::var_os("POOLEQ_TRACE").is_some() {
            eprintln!(
                "[trace] iter {iter}: master {:?} primal {:.4} dual {:.4} nodes {} in {:.2}s",
                master.status, master.primal, master.dual, master.nodes, master_time
            );
        }
        match master.status {
            SolveStatus::UnboundedBox => return Err(EngineError::UnboundedBox),
            SolveStatus::Infeasible => {
                return Err(EngineError::InfeasiblePoint(
                    "relaxed master proved infeasible; the game admits no linked point".into(),
                ))
            }
            _ => {}
        }
        // the master's dual bound is a valid lower bound on total
        // disequilibrium; it never regresses because cuts only accumulate
        eta_lb = eta_lb.max(master.dual);
        let master_gap = (master.primal - master.dual).max(0.0);

        let Some(master_point) = master.point.clone() else {
            notes.push(format!("iteration {iter}: master produced no candidate within its limits"));
            iterations.push(IterRow {
                iter,
                eta_lb,
                eta_ub,
                master_time_s: master_time,
                sub_time_s: 0.0,
                cuts_total: cuts.total(),
            });
            break;
        };
        let pi_hat = rmp.extract_pi(&master_point, game);
        let points_hat: Vec<Vec<f64>> =
            rmp.player_vars.iter().map(|vars| vars.extract(&master_point)).collect();
        let w_hat: Vec<f64> = rmp.w.iter().map(|&v| master_point[v]).collect();

        // subproblems at the candidate
        let sub_start = Instant::now();
        let contexts = contexts_at(game, &pi_hat, &rmp.player_vars, &points_hat_global(&rmp, &master_point));
        let subs = solve_all_subproblems(game, cfg, &contexts)?;
        let sub_time = sub_start.elapsed().as_secs_f64();
        if std::env::var_os("POOLEQ_TRACE").is_some() {
            for (j, s) in subs.iter().enumerate() {
                eprintln!(
                    "[trace]   sub {j}: {:?} primal {:.4} dual {:.4} nodes {}",
                    s.result.status, s.result.primal, s.result.dual, s.result.nodes
                );
            }
            eprintln!("[trace]   pi_hat {pi_hat:?} w_hat {w_hat:?} sub time {sub_time:.2}s");
        }

        let mut sub_gap_total = 0.0;
        let mut payoffs_hat = Vec::with_capacity(subs.len());
        for (j, ctx) in contexts.iter().enumerate() {
            // the candidate's payoff is evaluated on the player's own
            // feasible-set variable layout
            let fs = crate::pooling::build_feasible_set(&game.players[j])?;
            let payoff = payoff_in_context(game, j, &fs.vars, &points_hat[j], ctx)?;
            payoffs_hat.push(payoff);
            sub_gap_total += (subs[j].dual() - subs[j].primal()).max(0.0);
        }

        // candidate quality and upper bound: dual bounds keep it valid even
        // when a subproblem stopped at a limit
        let eta_candidate: f64 = subs
            .iter()
            .zip(&payoffs_hat)
            .map(|(s, &p)| (s.dual() - p).max(0.0))
            .sum();
        if eta_candidate < eta_ub {
            eta_ub = eta_candidate;
            best = Some(Candidate {
                pi: pi_hat.clone(),
                points: points_hat.clone(),
                payoffs: payoffs_hat.clone(),
                dual_bounds: subs.iter().map(|s| s.dual()).collect(),
                eta: eta_candidate,
                phase: Phase::Standard,
                iter_found: iter,
            });
        }

        iterations.push(IterRow {
            iter,
            eta_lb,
            eta_ub,
            master_time_s: master_time,
            sub_time_s: sub_time,
            cuts_total: cuts.total(),
        });

        // optimality check: every lifted payoff must cover the true best
        // response (its dual bound when the subproblem hit a limit)
        let all_covered = subs.iter().zip(&w_hat).all(|(s, &wj)| {
            let target = if s.hit_limit() { s.dual() } else { s.primal() };
            wj >= target - cfg.eps
        });
        let deltas_ok = subs
            .iter()
            .zip(&payoffs_hat)
            .all(|(s, &p)| s.dual() - p <= cfg.eps * (1.0 + s.dual().abs()));
        if all_covered && deltas_ok {
            verdict = Verdict::Equilibrium;
            break;
        }

        // cuts from the best responses
        for (j, s) in subs.iter().enumerate() {
            if let Some(point) = s.point() {
                cuts.add(j, StoredPoint::from_point(&game.players[j], &s.vars, point));
            }
        }

        if cfg.early_stop_on_positive_lb && eta_lb > cfg.eps {
            verdict = Verdict::NoEquilibriumCertified;
            break;
        }
        if eta_ub - eta_lb.max(0.0) <= cfg.eps {
            break;
        }
        // the inner solvers cannot separate the bounds further than their
        // own gaps; stop honestly once that resolution is reached
        if eta_ub - eta_lb.max(0.0) <= cfg.eps + master_gap + sub_gap_total {
            converged_within_gaps = true;
            notes.push(format!(
                "stopped at iteration {iter}: bound gap {:.6} within solver gaps {:.6}",
                eta_ub - eta_lb.max(0.0),
                master_gap + sub_gap_total
            ));
            break;
        }
    }

    if verdict != Verdict::Equilibrium {
        if eta_lb > cfg.eps {
            verdict = Verdict::NoEquilibriumCertified;
        } else if eta_ub <= cfg.eps {
            // the best candidate is itself an epsilon-equilibrium
            verdict = Verdict::Equilibrium;
        }
    }

    let best = best.ok_or_else(|| {
        EngineError::InfeasiblePoint("no candidate produced; master never returned a point".into())
    })?;
    Ok(finish(verdict, eta_lb, eta_ub, best, iterations, ws_cuts, converged_within_gaps, notes))
}

fn points_hat_global(rmp: &super::rmp::RmpModel, master_point: &[f64]) -> Vec<Vec<f64>> {
    rmp.player_vars.iter().map(|_| master_point.to_vec()).collect()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    verdict: Verdict,
    eta_lb: f64,
    eta_ub: f64,
    best: Candidate,
    iterations: Vec<IterRow>,
    ws_cuts: Vec<usize>,
    converged_within_gaps: bool,
    notes: Vec<String>,
) -> EquilibriumReport {
    let players = player_report(&best);
    EquilibriumReport {
        verdict,
        eta_lb: if eta_lb.is_finite() { eta_lb } else { 0.0_f64.min(eta_ub) },
        eta_ub,
        pi: best.pi,
        players,
        player_points: best.points,
        iterations,
        pbf: Some(best.phase),
        ibf: Some(best.iter_found),
        ws_cuts,
        converged_within_gaps,
        notes,
    }
}
