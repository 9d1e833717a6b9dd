use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use pooleq::equilibrium::{
    self, EngineConfig, EquilibriumReport, GridSpec, SubContext, Verdict,
};
use pooleq::games;
use pooleq::io::{self, Provenance};
use pooleq::pooling::{catalog, catalog_with_base, Competition, GameInstance};

use crate::table;
use crate::{Common, EXIT_INCONCLUSIVE, EXIT_NO_EQUILIBRIUM, EXIT_OK};

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn load_game(c: &Common) -> Result<GameInstance, Box<dyn std::error::Error>> {
    let mut game = match (&c.catalog, &c.instance) {
        (Some(name), Some(path)) => {
            let base = io::parse_instance_file(path)?;
            catalog_with_base(name, &base)?
        }
        (Some(name), None) => catalog(name)?,
        (None, Some(path)) => io::parse_instance_file(path)?,
        (None, None) => return Err("pass --catalog or --instance".into()),
    };
    if let Some(overrides) = &c.mode_overrides {
        for token in overrides.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match token {
                "pt" => game.mode = Competition::PriceTaker,
                "nc" => game.mode = Competition::NashCournot,
                "cont" => {
                    for p in &mut game.players {
                        p.cfixed.clear();
                        p.fmin.clear();
                    }
                }
                other => return Err(format!("unknown mode override `{other}`").into()),
            }
        }
    }
    game.validate()?;
    Ok(game)
}

fn config(c: &Common) -> EngineConfig {
    let mut cfg = EngineConfig::default();
    if let Some(eps) = c.eps {
        cfg.eps = eps;
    }
    if let Some(gap) = c.gap {
        cfg.rel_gap = gap;
    }
    if let Some(t) = c.rmp_time {
        cfg.rmp_time_limit_s = t;
    }
    if let Some(t) = c.sub_time {
        cfg.sub_time_limit_s = t;
    }
    if let Some(w) = c.workers {
        cfg.workers = w.max(1);
    }
    cfg.warmstart_seeds = c.seed.clone();
    cfg
}

fn provenance(c: &Common, command: &str) -> Provenance {
    Provenance {
        command: command.into(),
        catalog: c.catalog.clone(),
        instance_path: c.instance.as_ref().map(|p| p.display().to_string()),
        seeds: c.seed.clone(),
        workers: c.workers.unwrap_or(1),
    }
}

fn exit_for(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Equilibrium => EXIT_OK,
        Verdict::NoEquilibriumCertified => EXIT_NO_EQUILIBRIUM,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn emit(
    c: &Common,
    command: &str,
    game: &GameInstance,
    cfg: &EngineConfig,
    report: &EquilibriumReport,
    total_s: f64,
) -> CmdResult {
    io::write_report(&c.out_dir, report, &provenance(c, command), cfg, total_s)?;
    table::print_report(command, game, report, total_s);
    println!("artifacts: {}", c.out_dir.display());
    Ok(exit_for(report.verdict))
}

pub fn solve_player(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    let cfg = config(c);
    let t0 = Instant::now();
    let mut docs = Vec::new();
    for j in 0..game.players.len() {
        let ctx = match game.mode {
            Competition::PriceTaker => {
                let prices: BTreeMap<String, f64> = game
                    .players[j]
                    .outputs
                    .iter()
                    .filter_map(|o| game.market_for(o).map(|m| (o.clone(), m.alpha)))
                    .collect();
                SubContext::PriceTaker { prices }
            }
            Competition::NashCournot => SubContext::NashCournot {
                rival_totals: game.markets.iter().map(|m| (m.output.clone(), 0.0)).collect(),
            },
        };
        let s = equilibrium::solve_subproblem(&game, j, &ctx, &cfg.sub_options())?;
        let point = s.point().map(|p| p.to_vec()).unwrap_or_default();
        let flows_in: BTreeMap<String, f64> =
            s.vars.f_in.iter().map(|(n, &v)| (n.clone(), point.get(v).copied().unwrap_or(0.0))).collect();
        let flows_out: BTreeMap<String, f64> =
            s.vars.f_out.iter().map(|(n, &v)| (n.clone(), point.get(v).copied().unwrap_or(0.0))).collect();
        println!("player {j}: profit {:.4} (dual bound {:.4}, {} nodes)", s.primal(), s.dual(), s.result.nodes);
        for (n, v) in &flows_in {
            println!("  buy  {n}: {v:.4}");
        }
        for (n, v) in &flows_out {
            println!("  sell {n}: {v:.4}");
        }
        docs.push(json!({
            "player": j,
            "profit": s.primal(),
            "profit_dual_bound": s.dual(),
            "nodes": s.result.nodes,
            "f_in": flows_in,
            "f_out": flows_out,
            "point": point,
        }));
    }
    std::fs::create_dir_all(&c.out_dir)?;
    let doc = json!({
        "version": "1",
        "players": docs,
        "provenance": provenance(c, "solve-player"),
        "timing": { "total_s": t0.elapsed().as_secs_f64() },
    });
    std::fs::write(c.out_dir.join("report.json"), format!("{:#}\n", doc))?;
    Ok(EXIT_OK)
}

pub fn welfare(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    let cfg = config(c);
    let t0 = Instant::now();
    let report = equilibrium::welfare_heuristic(&game, &cfg)?;
    emit(c, "welfare", &game, &cfg, &report, t0.elapsed().as_secs_f64())
}

pub fn mono_nc(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    let cfg = config(c);
    let t0 = Instant::now();
    let report = equilibrium::monolithic_nc_heuristic(&game, &cfg)?;
    emit(c, "mono-nc", &game, &cfg, &report, t0.elapsed().as_secs_f64())
}

pub fn min_diseq(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    let cfg = config(c);
    let t0 = Instant::now();
    let report = equilibrium::min_disequilibrium(&game, &cfg)?;
    emit(c, "min-diseq", &game, &cfg, &report, t0.elapsed().as_secs_f64())
}

pub fn mesh(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    let cfg = config(c);
    let spec = GridSpec::for_game(&game, c.grid_step.unwrap_or(0.10));
    let t0 = Instant::now();
    let mesh = equilibrium::mesh_grid(&game, &spec, &cfg)?;
    io::write_mesh(&c.out_dir, &mesh)?;
    let argmin: BTreeMap<String, f64> = mesh
        .axes
        .iter()
        .map(|(name, _)| name.clone())
        .zip(mesh.argmin.iter().copied())
        .collect();
    let doc = json!({
        "version": "1",
        "min_eta": mesh.min_value,
        "argmin": argmin,
        "dims": mesh.dims(),
        "provenance": provenance(c, "mesh"),
        "timing": { "total_s": t0.elapsed().as_secs_f64() },
    });
    std::fs::write(c.out_dir.join("report.json"), format!("{:#}\n", doc))?;
    println!(
        "mesh: {} cells, minimum disequilibrium {:.4} at {:?}",
        mesh.cells.len(),
        mesh.min_value,
        argmin
    );
    println!("artifacts: {}", c.out_dir.display());
    Ok(EXIT_OK)
}

pub fn jacobi(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    let cfg = config(c);
    let t0 = Instant::now();
    let jr = equilibrium::jacobi(&game, None, cfg.max_iters, &cfg)?;
    let pi = derived_prices(&game, &jr.points)?;
    let outcome = equilibrium::verify(&game, &pi, &jr.points, &cfg)?;
    println!(
        "jacobi: {} rounds, {}; final verification: {:?}",
        jr.rounds,
        if jr.converged { "converged" } else { "not converged" },
        outcome.verdict
    );
    std::fs::create_dir_all(&c.out_dir)?;
    let doc = json!({
        "version": "1",
        "converged": jr.converged,
        "rounds": jr.rounds,
        "payoff_trajectory": jr.payoff_trajectory,
        "pi": pi,
        "verdict": format!("{:?}", outcome.verdict),
        "players": outcome.players.iter().map(|p| json!({
            "profit": p.profit, "delta": p.delta,
        })).collect::<Vec<_>>(),
        "provenance": provenance(c, "jacobi"),
        "timing": { "total_s": t0.elapsed().as_secs_f64() },
    });
    std::fs::write(c.out_dir.join("report.json"), format!("{:#}\n", doc))?;
    Ok(exit_for(outcome.verdict))
}

fn derived_prices(
    game: &GameInstance,
    points: &[Vec<f64>],
) -> Result<BTreeMap<String, f64>, Box<dyn std::error::Error>> {
    let maps: Vec<_> = game
        .players
        .iter()
        .map(pooleq::pooling::build_feasible_set)
        .collect::<Result<Vec<_>, _>>()?;
    let vm: Vec<_> = maps.into_iter().map(|fs| fs.vars).collect();
    Ok(equilibrium::implied_prices(game, &vm, points))
}

pub fn warmstart(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    let cfg = config(c);
    let seeds = if c.seed.is_empty() { vec![1] } else { c.seed.clone() };
    let t0 = Instant::now();
    std::fs::create_dir_all(&c.out_dir)?;
    let mut worst = Verdict::Equilibrium;
    let mut docs = Vec::new();
    for &seed in &seeds {
        match game.mode {
            Competition::PriceTaker => {
                let ws = equilibrium::warmstart_pt(&game, seed, &cfg)?;
                println!("seed {seed}: prices {:?}, {} cuts", ws.prices, ws.points.len());
                docs.push(json!({
                    "seed": seed,
                    "prices": ws.prices,
                    "cuts_per_player": ws.points.len(),
                    "verdict": "inconclusive",
                }));
                worst = Verdict::Inconclusive;
            }
            Competition::NashCournot => {
                let ws = equilibrium::warmstart_nc(&game, seed, &cfg)?;
                let max_delta: f64 = ws
                    .dual_bounds
                    .iter()
                    .zip(&ws.payoffs)
                    .map(|(u, p)| (u - p).max(0.0))
                    .fold(0.0, f64::max);
                let verdict = if max_delta <= cfg.eps { Verdict::Equilibrium } else { Verdict::Inconclusive };
                println!(
                    "seed {seed}: prices {:?}, payoffs {:?}, max delta {max_delta:.6} -> {verdict:?}",
                    ws.prices, ws.payoffs
                );
                docs.push(json!({
                    "seed": seed,
                    "prices": ws.prices,
                    "payoffs": ws.payoffs,
                    "dual_bounds": ws.dual_bounds,
                    "max_delta": max_delta,
                    "verdict": format!("{verdict:?}"),
                }));
                if verdict != Verdict::Equilibrium {
                    worst = Verdict::Inconclusive;
                }
            }
        }
    }
    let doc = json!({
        "version": "1",
        "runs": docs,
        "provenance": provenance(c, "warmstart"),
        "timing": { "total_s": t0.elapsed().as_secs_f64() },
    });
    std::fs::write(c.out_dir.join("report.json"), format!("{:#}\n", doc))?;
    Ok(exit_for(worst))
}

pub fn verify(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    let cfg = config(c);
    let path = c.out_dir.join("report.json");
    let (pi, points) = read_candidate(&path)?;
    let t0 = Instant::now();
    let outcome = equilibrium::verify(&game, &pi, &points, &cfg)?;
    for (j, p) in outcome.players.iter().enumerate() {
        println!(
            "player {j}: profit {:.4} dual {:.4} delta {:.6} rgap {}",
            p.profit,
            p.profit_dual_bound,
            p.delta,
            io::rgap_cell(p.rgap)
        );
    }
    println!("verdict: {:?}", outcome.verdict);
    let doc = json!({
        "version": "1",
        "verdict": format!("{:?}", outcome.verdict),
        "players": outcome.players.iter().map(|p| json!({
            "profit": p.profit,
            "profit_dual_bound": p.profit_dual_bound,
            "delta": p.delta,
            "rgap_display": io::rgap_cell(p.rgap),
        })).collect::<Vec<_>>(),
        "provenance": provenance(c, "verify"),
        "timing": { "total_s": t0.elapsed().as_secs_f64() },
    });
    std::fs::write(c.out_dir.join("verification.json"), format!("{:#}\n", doc))?;
    Ok(exit_for(outcome.verdict))
}

/// Pull the candidate (prices, per-player points) back out of a report.
fn read_candidate(path: &Path) -> Result<(BTreeMap<String, f64>, Vec<Vec<f64>>), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read candidate from {}: {e}", path.display()))?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let pi = doc
        .get("pi")
        .and_then(|v| v.as_object())
        .ok_or("report.json has no `pi` object")?
        .iter()
        .map(|(k, v)| Ok((k.clone(), v.as_f64().ok_or("non-numeric price")?)))
        .collect::<Result<BTreeMap<String, f64>, &str>>()?;
    let points = doc
        .get("player_points")
        .and_then(|v| v.as_array())
        .ok_or("report.json has no `player_points` array")?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or("player point must be an array")?
                .iter()
                .map(|v| v.as_f64().ok_or("non-numeric coordinate"))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<Vec<f64>>, _>>()?;
    Ok((pi, points))
}

pub fn demo(c: &Common) -> CmdResult {
    let t0 = Instant::now();
    let rows = games::appendix_b_demo(&[1.0, 10.0, 100.0]);
    println!("box game min x1*x2 over [-m, m]^2:");
    println!("{:>8} {:>14} {:>22} {:>14}", "m", "mono optimum", "mono point", "origin delta");
    for r in &rows {
        println!(
            "{:>8} {:>14.4} {:>10.2},{:>10.2} {:>14.4}",
            r.m, r.monolithic_optimum, r.monolithic_point.0, r.monolithic_point.1,
            r.origin_deltas.0.max(r.origin_deltas.1)
        );
    }
    println!("the origin stays an equilibrium under every box, while the monolithic optimum diverges");

    let game = games::KnapsackGame::demo();
    let kkt = equilibrium::knapsack_kkt_demo(&game)?;
    println!(
        "knapsack game: {} feasible profiles pass the first-order system (max residual {:.2e}), {} are true equilibria",
        kkt.kkt_feasible.len(),
        kkt.max_residual,
        kkt.true_equilibria.len()
    );
    for eq in &kkt.true_equilibria {
        println!("  equilibrium: {eq:?}");
    }
    std::fs::create_dir_all(&c.out_dir)?;
    let doc = json!({
        "version": "1",
        "box_game": rows.iter().map(|r| json!({
            "m": r.m,
            "monolithic_optimum": r.monolithic_optimum,
            "monolithic_point": [r.monolithic_point.0, r.monolithic_point.1],
            "monolithic_deltas": [r.monolithic_deltas.0, r.monolithic_deltas.1],
            "origin_deltas": [r.origin_deltas.0, r.origin_deltas.1],
        })).collect::<Vec<_>>(),
        "knapsack": {
            "kkt_feasible": kkt.kkt_feasible,
            "true_equilibria": kkt.true_equilibria,
            "max_residual": kkt.max_residual,
        },
        "provenance": provenance(c, "demo"),
        "timing": { "total_s": t0.elapsed().as_secs_f64() },
    });
    std::fs::write(c.out_dir.join("report.json"), format!("{:#}\n", doc))?;
    Ok(EXIT_OK)
}

pub fn export_instance(c: &Common) -> CmdResult {
    let game = load_game(c)?;
    std::fs::create_dir_all(&c.out_dir)?;
    let path = c.out_dir.join("instance.json");
    std::fs::write(&path, io::serialize_instance(&game))?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}
