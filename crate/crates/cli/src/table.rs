//! Fixed-width stdout summary mirroring the usual reporting fields: per
//! player the profit and relative disequilibrium gap, plus run-level bounds,
//! phase/iteration of the best candidate, and warmstart cut counts.

use pooleq::equilibrium::{EquilibriumReport, Phase, Verdict};
use pooleq::io::rgap_cell;
use pooleq::pooling::GameInstance;

pub fn print_report(command: &str, game: &GameInstance, report: &EquilibriumReport, total_s: f64) {
    let verdict = match report.verdict {
        Verdict::Equilibrium => "equilibrium",
        Verdict::NoEquilibriumCertified => "no-equilibrium-certified",
        Verdict::Inconclusive => "inconclusive",
    };
    println!("{command}: {verdict}");
    println!(
        "eta_lb {:>12.4}   eta_ub {:>12.4}   iters {:>3}   time {:>8.2}s",
        report.eta_lb,
        report.eta_ub,
        report.iterations.len(),
        total_s
    );
    if let Some(pbf) = report.pbf {
        let pbf = match pbf {
            Phase::Warmstart => "WS",
            Phase::Standard => "S",
        };
        println!(
            "phase best found: {pbf}   iteration best found: {}   ws cuts: {:?}",
            report.ibf.unwrap_or(0),
            report.ws_cuts
        );
    }
    let prices: Vec<String> = report.pi.iter().map(|(o, p)| format!("{o}={p:.4}")).collect();
    println!("prices: {}", prices.join("  "));
    println!("{:>8} {:>14} {:>14} {:>12} {:>10}", "player", "profit", "dual bound", "delta", "rgap%");
    for (j, p) in report.players.iter().enumerate() {
        let rgap_pct = p.rgap.map(|g| g * 100.0);
        println!(
            "{:>8} {:>14.4} {:>14.4} {:>12.6} {:>10}",
            j,
            p.profit,
            p.profit_dual_bound,
            p.delta,
            rgap_cell(rgap_pct)
        );
    }
    let _ = game;
}
