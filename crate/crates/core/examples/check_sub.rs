use std::collections::BTreeMap;
use pooleq::equilibrium::{solve_subproblem, SubContext};
use pooleq::global::SolveOptions;

fn main() {
    let game = pooleq::pooling::catalog("haverly-2p-pc-cont").unwrap();
    let prices: BTreeMap<String, f64> = [("H".to_string(), 11.0), ("L".to_string(), 17.993003107589747)].into();
    let ctx = SubContext::PriceTaker { prices };
    let s = solve_subproblem(&game, 0, &ctx, &SolveOptions::default()).unwrap();
    println!("status {:?} primal {:.4} dual {:.4} nodes {}", s.result.status, s.result.primal, s.result.dual, s.result.nodes);
}
