use std::collections::BTreeMap;

fn main() {
    for name in ["haverly-2p-nc-cont", "haverly-2p-nc-mip"] {
        let game = pooleq::pooling::catalog(name).unwrap();
        let t0 = std::time::Instant::now();
        let mono = pooleq::pooling::build_monolithic_nc_model(&game, game.has_binaries()).unwrap();
        let res = pooleq::global::solve_global(&mono.model, &pooleq::global::SolveOptions::default());
        println!("{name}: status {:?} obj {:.4} nodes {} in {:?}", res.status, res.primal, res.nodes, t0.elapsed());
        let p = res.point.unwrap();
        let mut totals: BTreeMap<String, f64> = BTreeMap::new();
        for vars in &mono.player_vars {
            for (o, &f) in &vars.f_out {
                *totals.entry(o.clone()).or_insert(0.0) += p[f];
            }
        }
        for (o, q) in &totals {
            let m = game.market_for(o).unwrap();
            println!("  q_{o} = {:.4}  pi = {:.4}", q, m.alpha - m.beta * q);
        }
        for (j, vars) in mono.player_vars.iter().enumerate() {
            let rivals: BTreeMap<String, f64> = totals
                .iter()
                .map(|(o, q)| (o.clone(), q - vars.f_out.get(o).map(|&f| p[f]).unwrap_or(0.0)))
                .collect();
            let profit = pooleq::pooling::payoff_nc(&game.players[j], vars, &p, &game, &rivals).unwrap();
            print!("  player {j}: profit {:.4} |", profit);
            for (o, &f) in &vars.f_out { print!(" out {o}={:.2}", p[f]); }
            for (i, &f) in &vars.f_in { print!(" in {i}={:.2}", p[f]); }
            for (i, &u) in &vars.buy { print!(" buy {i}={:.0}", p[u]); }
            println!();
        }
    }
}
