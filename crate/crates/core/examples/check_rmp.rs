use pooleq::equilibrium::{CutPool, LinkingSet};
use pooleq::global::{solve_global, SolveOptions};

fn main() {
    let game = pooleq::pooling::catalog("haverly-2p-pc-cont").unwrap();
    let cuts = CutPool::seeded(&game).unwrap();
    let rmp = pooleq::equilibrium::build_rmp(&game, LinkingSet::for_game(&game, false), &cuts).unwrap();
    println!("rmp vars {} rows {} bilinear pairs {}", rmp.model.num_vars(), rmp.model.constraints.len(), rmp.model.bilinear_pairs().len());
    for limit in [1000usize, 5000, 20000, 100000] {
        let t0 = std::time::Instant::now();
        let res = solve_global(&rmp.model, &SolveOptions { node_limit: Some(limit), ..SolveOptions::default() });
        println!("limit {limit}: status {:?} primal {:.4} dual {:.4} nodes {} in {:?}", res.status, res.primal, res.dual, res.nodes, t0.elapsed());
        if res.status == pooleq::global::SolveStatus::Optimal { break; }
    }
}
