fn main() {
    let game = pooleq::pooling::catalog("haverly-2p-pc-cont").unwrap();
    let w = pooleq::pooling::build_welfare_model(&game, false).unwrap();
    let res = pooleq::global::solve_global(&w.model, &pooleq::global::SolveOptions::default());
    println!("status {:?} welfare {} nodes {}", res.status, res.primal, res.nodes);
    let p = res.point.unwrap();
    for (o, &q) in &w.quantity {
        let m = game.market_for(o).unwrap();
        println!("q_{o} = {:.4}  pi = {:.4}", p[q], m.alpha - m.beta * p[q]);
    }
    for (j, vars) in w.player_vars.iter().enumerate() {
        let cost = vars.cost_value(&game.players[j], &p);
        let mut rev = 0.0;
        for (o, &f) in &vars.f_out {
            let m = game.market_for(o).unwrap();
            let q: f64 = w.player_vars.iter().filter_map(|v| v.f_out.get(o)).map(|&v| p[v]).sum();
            rev += (m.alpha - m.beta * q) * p[f];
        }
        println!("player {j}: profit {:.4}", rev - cost);
        for (o, &f) in &vars.f_out { print!("  out {o} = {:.3}", p[f]); }
        for (i, &f) in &vars.f_in { print!("  in {i} = {:.3}", p[f]); }
        println!();
    }
    // symmetric instance
    let sym = pooleq::pooling::catalog("haverly-sym-pc2").unwrap();
    let w2 = pooleq::pooling::build_welfare_model(&sym, false).unwrap();
    let r2 = pooleq::global::solve_global(&w2.model, &pooleq::global::SolveOptions::default());
    println!("sym: status {:?} welfare {} nodes {}", r2.status, r2.primal, r2.nodes);
    let p2 = r2.point.unwrap();
    for (j, vars) in w2.player_vars.iter().enumerate() {
        let cost = vars.cost_value(&sym.players[j], &p2);
        let mut rev = 0.0;
        for (o, &f) in &vars.f_out {
            let m = sym.market_for(o).unwrap();
            let q: f64 = w2.player_vars.iter().filter_map(|v| v.f_out.get(o)).map(|&v| p2[v]).sum();
            rev += (m.alpha - m.beta * q) * p2[f];
        }
        println!("sym player {j}: profit {:.4}", rev - cost);
    }
    for (o, &q) in &w2.quantity {
        let m = sym.market_for(o).unwrap();
        println!("sym q_{o} = {:.4} pi = {:.4}", p2[q], m.alpha - m.beta * p2[q]);
    }
}
