use std::collections::BTreeMap;
use pooleq::equilibrium::{solve_subproblem, CutPool, LinkingSet, StoredPoint, SubContext};
use pooleq::global::{solve_global, SolveOptions};

fn main() {
    let game = pooleq::pooling::catalog("haverly-2p-pc-cont").unwrap();
    let mut cuts = CutPool::seeded(&game).unwrap();
    let prices: BTreeMap<String, f64> = [("H".to_string(), 11.0), ("L".to_string(), 17.993003107589747)].into();
    for j in 0..2 {
        let ctx = SubContext::PriceTaker { prices: prices.clone() };
        let s = solve_subproblem(&game, j, &ctx, &SolveOptions::default()).unwrap();
        let p = s.result.point.clone().unwrap();
        cuts.add(j, StoredPoint::from_point(&game.players[j], &s.vars, &p));
    }
    let rmp = pooleq::equilibrium::build_rmp(&game, LinkingSet::for_game(&game, false), &cuts).unwrap();
    println!("rmp2 vars {} rows {}", rmp.model.num_vars(), rmp.model.constraints.len());
    let t0 = std::time::Instant::now();
    let res = solve_global(&rmp.model, &SolveOptions { node_limit: Some(200000), ..SolveOptions::default() });
    println!("{:?} primal {:.4} dual {:.4} nodes {} in {:?}", res.status, res.primal, res.dual, res.nodes, t0.elapsed());
}
