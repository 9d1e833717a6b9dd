//! Instance files, reports, and CSV emission.
//!
//! Instances travel as JSON (version "1", unknown keys rejected); grids and
//! iteration logs go to CSV with fixed column order, six-decimal fixed-point
//! numbers, and LF line endings. The report JSON is byte-stable for a fixed
//! (instance, config, seed): every timing number lives in one "timing"
//! block, everything else is deterministic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{EngineConfig, EquilibriumReport, MeshResult, Phase, Verdict};
use crate::pooling::{Competition, GameInstance, Market, PoolingInstance};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: String,
    mode: String,
    players: Vec<PlayerFile>,
    markets: Vec<MarketFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlayerFile {
    nodes: NodesFile,
    arcs: Vec<(String, String)>,
    specs: Vec<String>,
    #[serde(default)]
    cin: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    cmin: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    cmax: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    fmin: BTreeMap<String, f64>,
    #[serde(default)]
    fmax: BTreeMap<String, f64>,
    #[serde(default)]
    cvar: BTreeMap<String, f64>,
    #[serde(default)]
    cfixed: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodesFile {
    inputs: Vec<String>,
    pools: Vec<String>,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarketFile {
    output_node: String,
    alpha: f64,
    beta: f64,
}

/// Parse and validate an instance document.
pub fn parse_instance(text: &str) -> Result<GameInstance, IoError> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| IoError::Schema(e.to_string()))?;
    if file.version != "1" {
        return Err(IoError::Schema(format!(
            "unsupported version `{}`; this reader handles version \"1\"",
            file.version
        )));
    }
    let mode = match file.mode.as_str() {
        "price_taker" => Competition::PriceTaker,
        "nash_cournot" => Competition::NashCournot,
        other => {
            return Err(IoError::Schema(format!(
                "mode `{other}` is not one of price_taker | nash_cournot"
            )))
        }
    };
    let players: Vec<PoolingInstance> = file
        .players
        .into_iter()
        .map(|p| PoolingInstance {
            inputs: p.nodes.inputs,
            pools: p.nodes.pools,
            outputs: p.nodes.outputs,
            arcs: p.arcs,
            specs: p.specs,
            cin: p.cin,
            cmin: p.cmin,
            cmax: p.cmax,
            fmin: p.fmin,
            fmax: p.fmax,
            cvar: p.cvar,
            cfixed: p.cfixed,
        })
        .collect();
    let markets = file
        .markets
        .into_iter()
        .map(|m| Market { output: m.output_node, alpha: m.alpha, beta: m.beta })
        .collect();
    let game = GameInstance { players, markets, mode };
    game.validate().map_err(|e| IoError::Semantic(e.to_string()))?;
    for (j, p) in game.players.iter().enumerate() {
        for o in &p.outputs {
            if !p.fmax(o).is_finite() {
                return Err(IoError::Semantic(format!(
                    "player {j} output `{o}` needs a finite fmax (it bounds the solver's boxes)"
                )));
            }
        }
    }
    Ok(game)
}

pub fn parse_instance_file(path: &Path) -> Result<GameInstance, IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

/// Serialize a game to the instance schema, pretty-printed.
pub fn serialize_instance(game: &GameInstance) -> String {
    let file = InstanceFile {
        version: "1".into(),
        mode: match game.mode {
            Competition::PriceTaker => "price_taker".into(),
            Competition::NashCournot => "nash_cournot".into(),
        },
        players: game
            .players
            .iter()
            .map(|p| PlayerFile {
                nodes: NodesFile {
                    inputs: p.inputs.clone(),
                    pools: p.pools.clone(),
                    outputs: p.outputs.clone(),
                },
                arcs: p.arcs.clone(),
                specs: p.specs.clone(),
                cin: p.cin.clone(),
                cmin: p.cmin.clone(),
                cmax: p.cmax.clone(),
                fmin: p.fmin.clone(),
                fmax: p.fmax.clone(),
                cvar: p.cvar.clone(),
                cfixed: p.cfixed.clone(),
            })
            .collect(),
        markets: game
            .markets
            .iter()
            .map(|m| MarketFile { output_node: m.output.clone(), alpha: m.alpha, beta: m.beta })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

/// Six-decimal fixed-point cell; infinities spell "inf".
pub fn csv_num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.6}")
    }
}

/// Relative-gap cell with the 0/0 convention for a zero dual bound.
pub fn rgap_cell(rgap: Option<f64>) -> String {
    match rgap {
        Some(v) => csv_num(v),
        None => "0/0".into(),
    }
}

fn phase_code(phase: Option<Phase>) -> &'static str {
    match phase {
        Some(Phase::Warmstart) => "WS",
        Some(Phase::Standard) => "S",
        None => "",
    }
}

fn verdict_code(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::Equilibrium => "equilibrium",
        Verdict::NoEquilibriumCertified => "no-equilibrium-certified",
        Verdict::Inconclusive => "inconclusive",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    pub catalog: Option<String>,
    pub instance_path: Option<String>,
    pub seeds: Vec<u64>,
    pub workers: usize,
}

#[derive(Serialize)]
struct PlayerDoc {
    profit: f64,
    profit_dual_bound: f64,
    delta: f64,
    rgap: Option<f64>,
    rgap_display: String,
}

#[derive(Serialize)]
struct IterDoc {
    iter: usize,
    eta_lb: f64,
    eta_ub: f64,
    cuts_total: usize,
}

#[derive(Serialize)]
struct TimingDoc {
    total_s: f64,
    master_time_s: Vec<f64>,
    sub_time_s: Vec<f64>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    version: &'static str,
    verdict: &'static str,
    eta_lb: f64,
    eta_ub: f64,
    pi: &'a BTreeMap<String, f64>,
    players: Vec<PlayerDoc>,
    player_points: &'a Vec<Vec<f64>>,
    phase_best_found: &'static str,
    iteration_best_found: Option<usize>,
    ws_cuts: &'a Vec<usize>,
    iterations: Vec<IterDoc>,
    converged_within_gaps: bool,
    notes: &'a Vec<String>,
    provenance: &'a Provenance,
    config: &'a EngineConfig,
    timing: TimingDoc,
}

/// The report document as a JSON string. Deterministic except for the
/// `timing` block.
pub fn report_json(
    report: &EquilibriumReport,
    prov: &Provenance,
    config: &EngineConfig,
    total_s: f64,
) -> String {
    let doc = ReportDoc {
        version: "1",
        verdict: verdict_code(report.verdict),
        eta_lb: report.eta_lb,
        eta_ub: report.eta_ub,
        pi: &report.pi,
        players: report
            .players
            .iter()
            .map(|p| PlayerDoc {
                profit: p.profit,
                profit_dual_bound: p.profit_dual_bound,
                delta: p.delta,
                rgap: p.rgap,
                rgap_display: rgap_cell(p.rgap),
            })
            .collect(),
        player_points: &report.player_points,
        phase_best_found: phase_code(report.pbf),
        iteration_best_found: report.ibf,
        ws_cuts: &report.ws_cuts,
        iterations: report
            .iterations
            .iter()
            .map(|r| IterDoc { iter: r.iter, eta_lb: r.eta_lb, eta_ub: r.eta_ub, cuts_total: r.cuts_total })
            .collect(),
        converged_within_gaps: report.converged_within_gaps,
        notes: &report.notes,
        provenance: prov,
        config,
        timing: TimingDoc {
            total_s,
            master_time_s: report.iterations.iter().map(|r| r.master_time_s).collect(),
            sub_time_s: report.iterations.iter().map(|r| r.sub_time_s).collect(),
        },
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    out
}

/// Iteration log CSV: iter, eta_lb, eta_ub, master_time_s, sub_time_s,
/// cuts_total.
pub fn iterations_csv(report: &EquilibriumReport) -> String {
    let mut out = String::from("iter,eta_lb,eta_ub,master_time_s,sub_time_s,cuts_total\n");
    for r in &report.iterations {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iter,
            csv_num(r.eta_lb),
            csv_num(r.eta_ub),
            csv_num(r.master_time_s),
            csv_num(r.sub_time_s),
            r.cuts_total
        );
    }
    out
}

/// Mesh matrix CSV: rows run over the first axis, columns over the second.
pub fn mesh_csv(mesh: &MeshResult) -> String {
    assert_eq!(mesh.axes.len(), 2, "matrix CSV is defined for two axes");
    let (row_name, rows) = &mesh.axes[0];
    let (col_name, cols) = &mesh.axes[1];
    let mut out = String::new();
    let _ = write!(out, "{row_name}\\{col_name}");
    for c in cols {
        let _ = write!(out, ",{}", csv_num(*c));
    }
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(out, "{}", csv_num(*r));
        for k in 0..cols.len() {
            let _ = write!(out, ",{}", csv_num(mesh.cells[i * cols.len() + k]));
        }
        out.push('\n');
    }
    out
}

/// Write report.json and iterations.csv into a directory.
pub fn write_report(
    dir: &Path,
    report: &EquilibriumReport,
    prov: &Provenance,
    config: &EngineConfig,
    total_s: f64,
) -> Result<(), IoError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report_json(report, prov, config, total_s))?;
    std::fs::write(dir.join("iterations.csv"), iterations_csv(report))?;
    Ok(())
}

pub fn write_mesh(dir: &Path, mesh: &MeshResult) -> Result<(), IoError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("mesh.csv"), mesh_csv(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pooling::catalog;

    #[test]
    fn catalog_instances_round_trip() {
        for name in ["haverly-single", "haverly-2p-nc-cont", "haverly-2p-pc-mip", "haverly-sym-pc3"] {
            let game = catalog(name).unwrap();
            let text = serialize_instance(&game);
            let back = parse_instance(&text).unwrap();
            assert_eq!(game, back, "{name} must round-trip");
        }
    }

    #[test]
    fn schema_violations_are_schema_errors() {
        assert!(matches!(parse_instance("{not json"), Err(IoError::Schema(_))));
        let junk = r#"{"version":"1","mode":"price_taker","players":[],"markets":[],"extra":1}"#;
        assert!(matches!(parse_instance(junk), Err(IoError::Schema(_))));
        let v2 = r#"{"version":"2","mode":"price_taker","players":[],"markets":[]}"#;
        assert!(matches!(parse_instance(v2), Err(IoError::Schema(_))));
    }

    #[test]
    fn semantic_violations_are_semantic_errors() {
        let game = catalog("haverly-single").unwrap();
        // negative slope
        let mut bad = game.clone();
        bad.markets[0].beta = -0.5;
        let text = serialize_instance(&bad);
        match parse_instance(&text) {
            Err(IoError::Semantic(msg)) => assert!(msg.contains("beta"), "{msg}"),
            other => panic!("expected semantic error, got {other:?}"),
        }
        // flow between pools is excluded by the formulation
        let mut pp = game.clone();
        pp.players[0].pools.push("P2".into());
        pp.players[0].arcs.push(("P".into(), "P2".into()));
        pp.players[0].arcs.push(("P2".into(), "H".into()));
        let text = serialize_instance(&pp);
        assert!(matches!(parse_instance(&text), Err(IoError::Semantic(_))));
        // outputs must carry finite caps
        let mut nocap = game;
        nocap.players[0].fmax.remove("H");
        let text = serialize_instance(&nocap);
        assert!(matches!(parse_instance(&text), Err(IoError::Semantic(_))));
    }

    #[test]
    fn csv_cells_are_fixed_point_with_sentinels() {
        assert_eq!(csv_num(1.0), "1.000000");
        assert_eq!(csv_num(f64::INFINITY), "inf");
        assert_eq!(rgap_cell(None), "0/0");
        assert_eq!(rgap_cell(Some(0.0001)), "0.000100");
    }

    #[test]
    fn mesh_csv_layout() {
        let mesh = MeshResult {
            axes: vec![
                ("H".into(), vec![9.0, 9.1]),
                ("L".into(), vec![14.0, 14.1, 14.2]),
            ],
            cells: vec![1.0, 2.0, f64::INFINITY, 4.0, 5.0, 6.0],
            min_value: 1.0,
            argmin: vec![9.0, 14.0],
        };
        let text = mesh_csv(&mesh);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "H\\L,14.000000,14.100000,14.200000");
        assert_eq!(lines[1], "9.000000,1.000000,2.000000,inf");
        assert_eq!(lines[2], "9.100000,4.000000,5.000000,6.000000");
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }
}
