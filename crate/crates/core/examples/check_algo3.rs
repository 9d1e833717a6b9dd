use pooleq::equilibrium::{min_disequilibrium, EngineConfig};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "haverly-sym-pc2".into());
    let game = pooleq::pooling::catalog(&name).unwrap();
    let cfg = EngineConfig { max_iters: 12, ..EngineConfig::default() };
    let t0 = std::time::Instant::now();
    let rep = min_disequilibrium(&game, &cfg).unwrap();
    eprintln!("[probe] {name}: verdict {:?} eta [{:.4},{:.4}] iters {} in {:?}", rep.verdict, rep.eta_lb, rep.eta_ub, rep.iterations.len(), t0.elapsed());
    eprintln!("[probe] pi {:?}", rep.pi);
    for p in &rep.players { eprintln!("[probe] profit {:.4} dual {:.4} delta {:.6}", p.profit, p.profit_dual_bound, p.delta); }
    for n in &rep.notes { eprintln!("[probe] note: {n}"); }
}
