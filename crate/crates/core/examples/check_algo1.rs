use pooleq::equilibrium::{min_disequilibrium, EngineConfig};

fn main() {
    for name in ["haverly-2p-pc-cont", "haverly-sym-pc2", "haverly-2p-nc-cont"] {
        let game = pooleq::pooling::catalog(name).unwrap();
        let cfg = EngineConfig::default();
        let t0 = std::time::Instant::now();
        match min_disequilibrium(&game, &cfg) {
            Ok(rep) => {
                println!(
                    "{name}: verdict {:?} eta [{:.4}, {:.4}] iters {} in {:?}",
                    rep.verdict, rep.eta_lb, rep.eta_ub, rep.iterations.len(), t0.elapsed()
                );
                println!("  pi: {:?}", rep.pi);
                for (j, p) in rep.players.iter().enumerate() {
                    println!("  player {j}: profit {:.4} dual {:.4} delta {:.6} rgap {:?}", p.profit, p.profit_dual_bound, p.delta, p.rgap);
                }
                for row in &rep.iterations {
                    println!("  iter {}: lb {:.4} ub {:.4} master {:.2}s sub {:.2}s cuts {}", row.iter, row.eta_lb, row.eta_ub, row.master_time_s, row.sub_time_s, row.cuts_total);
                }
                for n in &rep.notes { println!("  note: {n}"); }
            }
            Err(e) => println!("{name}: ERROR {e}"),
        }
    }
}
