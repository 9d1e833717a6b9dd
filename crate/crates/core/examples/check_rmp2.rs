use pooleq::equilibrium::{CutPool, EngineConfig, LinkingSet};
use pooleq::global::{solve_global, SolveOptions};
use std::time::Duration;

fn main() {
    let game = pooleq::pooling::catalog("haverly-2p-pc-cont").unwrap();
    let cuts = CutPool::seeded(&game).unwrap();
    let rmp = pooleq::equilibrium::build_rmp(&game, LinkingSet::for_game(&game, false), &cuts).unwrap();
    let t0 = std::time::Instant::now();
    let res = solve_global(&rmp.model, &SolveOptions::default());
    println!("default: {:?} {:.4}/{:.4} nodes {} in {:?}", res.status, res.primal, res.dual, res.nodes, t0.elapsed());
    let cfg = EngineConfig::default();
    let t0 = std::time::Instant::now();
    let res = solve_global(&rmp.model, &cfg.rmp_options());
    println!("rmp_options: {:?} {:.4}/{:.4} nodes {} in {:?}", res.status, res.primal, res.dual, res.nodes, t0.elapsed());
    let t0 = std::time::Instant::now();
    let res = solve_global(&rmp.model, &SolveOptions{ time_limit: Some(Duration::from_secs_f64(20.0)), ..SolveOptions::default()});
    println!("20s limit: {:?} {:.4}/{:.4} nodes {} in {:?}", res.status, res.primal, res.dual, res.nodes, t0.elapsed());
}
