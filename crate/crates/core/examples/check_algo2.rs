use pooleq::equilibrium::{min_disequilibrium, EngineConfig};

fn main() {
    let game = pooleq::pooling::catalog("haverly-2p-pc-cont").unwrap();
    let cfg = EngineConfig { max_iters: 8, ..EngineConfig::default() };
    eprintln!("[probe] starting");
    let rep = min_disequilibrium(&game, &cfg).unwrap();
    eprintln!("[probe] verdict {:?} eta [{:.4},{:.4}] iters {}", rep.verdict, rep.eta_lb, rep.eta_ub, rep.iterations.len());
    eprintln!("[probe] pi {:?}", rep.pi);
    for p in &rep.players { eprintln!("[probe] profit {:.4} dual {:.4} delta {:.6}", p.profit, p.profit_dual_bound, p.delta); }
}
