//! Built-in game instances.

use std::collections::BTreeMap;

use super::{Competition, GameInstance, Market, PoolingError, PoolingInstance};

/// The classic single-pool crude-blending network: crudes A and B blend in
/// the pool, crude C feeds the outputs directly. Costs, sulfur contents, and
/// output caps are the standard ones; `%` data is stored as fractions.
fn haverly_network(cvar: [f64; 3], cfixed_b: f64) -> PoolingInstance {
    let f = |pairs: &[(&str, f64)]| -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    };
    let spec = |pairs: &[(&str, f64)]| -> BTreeMap<String, BTreeMap<String, f64>> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), f(&[("sulfur", *v)])))
            .collect()
    };
    PoolingInstance {
        inputs: vec!["A".into(), "B".into(), "C".into()],
        pools: vec!["P".into()],
        outputs: vec!["H".into(), "L".into()],
        arcs: vec![
            ("A".into(), "P".into()),
            ("B".into(), "P".into()),
            ("C".into(), "H".into()),
            ("C".into(), "L".into()),
            ("P".into(), "H".into()),
            ("P".into(), "L".into()),
        ],
        specs: vec!["sulfur".into()],
        cin: spec(&[("A", 0.03), ("B", 0.01), ("C", 0.02)]),
        cmin: BTreeMap::new(),
        cmax: spec(&[("H", 0.025), ("L", 0.015)]),
        fmin: BTreeMap::new(),
        fmax: f(&[("A", 300.0), ("B", 300.0), ("C", 300.0), ("P", 300.0), ("H", 100.0), ("L", 200.0)]),
        cvar: f(&[("A", cvar[0]), ("B", cvar[1]), ("C", cvar[2])]),
        cfixed: if cfixed_b > 0.0 { f(&[("B", cfixed_b)]) } else { BTreeMap::new() },
    }
}

const PLAYER1_COSTS: [f64; 3] = [6.0, 16.0, 10.0];
const PLAYER2_COSTS: [f64; 3] = [3.0, 18.0, 11.0];

fn elastic_markets() -> Vec<Market> {
    vec![
        Market { output: "H".into(), alpha: 13.0, beta: 0.02 },
        Market { output: "L".into(), alpha: 23.0, beta: 0.04 },
    ]
}

fn two_player(mode: Competition, fixed: bool) -> GameInstance {
    let cfixed = if fixed { 200.0 } else { 0.0 };
    GameInstance {
        players: vec![
            haverly_network(PLAYER1_COSTS, cfixed),
            haverly_network(PLAYER2_COSTS, cfixed),
        ],
        markets: elastic_markets(),
        mode,
    }
}

fn symmetric(n: usize) -> GameInstance {
    GameInstance {
        players: (0..n).map(|_| haverly_network(PLAYER1_COSTS, 0.0)).collect(),
        markets: elastic_markets(),
        mode: Competition::PriceTaker,
    }
}

pub fn catalog_names() -> Vec<&'static str> {
    vec![
        "haverly-single",
        "haverly-2p-pc-cont",
        "haverly-2p-pc-mip",
        "haverly-2p-nc-cont",
        "haverly-2p-nc-mip",
        "haverly-sym-pcN (N >= 1, e.g. haverly-sym-pc2)",
        "adhya1-mod (needs a base network file)",
        "bental5-mod (needs a base network file)",
    ]
}

/// Built-in instance by name. The adhya1/bental5 variants only exist relative
/// to a user-supplied base network; request them via [`catalog_with_base`].
pub fn catalog(name: &str) -> Result<GameInstance, PoolingError> {
    match name {
        "haverly-single" => Ok(GameInstance {
            players: vec![haverly_network(PLAYER1_COSTS, 0.0)],
            markets: vec![
                Market { output: "H".into(), alpha: 9.0, beta: 0.0 },
                Market { output: "L".into(), alpha: 15.0, beta: 0.0 },
            ],
            mode: Competition::PriceTaker,
        }),
        "haverly-2p-pc-cont" => Ok(two_player(Competition::PriceTaker, false)),
        "haverly-2p-pc-mip" => Ok(two_player(Competition::PriceTaker, true)),
        "haverly-2p-nc-cont" => Ok(two_player(Competition::NashCournot, false)),
        "haverly-2p-nc-mip" => Ok(two_player(Competition::NashCournot, true)),
        "adhya1-mod" | "bental5-mod" => Err(PoolingError::MissingBaseData(name.to_string())),
        _ => {
            if let Some(rest) = name.strip_prefix("haverly-sym-pc") {
                let digits = rest.trim_start_matches('(').trim_end_matches(')');
                if let Ok(n) = digits.parse::<usize>() {
                    if n >= 1 {
                        return Ok(symmetric(n));
                    }
                }
            }
            Err(PoolingError::UnknownInstance(name.to_string()))
        }
    }
}

struct GameMods {
    cvar: [&'static [f64]; 2],
    cfixed: f64,
    demand: &'static [(f64, f64)],
}

const ADHYA1_MODS: GameMods = GameMods {
    cvar: [&[7.0, 3.0, 2.0, 10.0, 5.0], &[6.0, 4.0, 1.0, 9.0, 7.0]],
    cfixed: 100.0,
    demand: &[(16.0, 0.0), (32.0, 0.28), (15.0, 0.0), (12.0, 0.20)],
};

const BENTAL5_MODS: GameMods = GameMods {
    cvar: [&[6.0, 16.0, 15.0, 12.0, 10.0], &[7.0, 14.0, 13.0, 15.0, 10.0]],
    cfixed: 200.0,
    demand: &[(25.0, 0.07), (23.0, 0.04), (27.0, 0.08), (22.0, 0.06), (17.0, 0.03)],
};

/// Two-player game built from a user-supplied base network (its first player
/// is the template): per-player variable costs, a fixed purchase cost on
/// every input, and linear inverse demand functions replace the base data.
pub fn catalog_with_base(name: &str, base: &GameInstance) -> Result<GameInstance, PoolingError> {
    let mods = match name {
        "adhya1-mod" => &ADHYA1_MODS,
        "bental5-mod" => &BENTAL5_MODS,
        _ => return catalog(name),
    };
    let template = base
        .players
        .first()
        .ok_or_else(|| PoolingError::MissingBaseData(name.to_string()))?;
    template.validate()?;
    if template.inputs.len() != mods.cvar[0].len() || template.outputs.len() != mods.demand.len() {
        return Err(PoolingError::MalformedNetwork(format!(
            "`{name}` needs a base network with {} inputs and {} outputs, got {} and {}",
            mods.cvar[0].len(),
            mods.demand.len(),
            template.inputs.len(),
            template.outputs.len()
        )));
    }
    let mut players = Vec::new();
    for j in 0..2 {
        let mut p = template.clone();
        p.cvar = p
            .inputs
            .iter()
            .zip(mods.cvar[j])
            .map(|(i, &c)| (i.clone(), c))
            .collect();
        p.cfixed = p.inputs.iter().map(|i| (i.clone(), mods.cfixed)).collect();
        players.push(p);
    }
    let markets = template
        .outputs
        .iter()
        .zip(mods.demand)
        .map(|(o, &(alpha, beta))| Market { output: o.clone(), alpha, beta })
        .collect();
    Ok(GameInstance { players, markets, mode: base.mode })
}
