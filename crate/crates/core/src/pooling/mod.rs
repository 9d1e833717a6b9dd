//! Pooling network instances and the model builders that turn them into
//! bilinear QCQP models: per-player feasible sets, price-taker and
//! Nash-Cournot payoffs, the social-welfare model, and the monolithic
//! Nash-Cournot model.
//!
//! Concentrations are stored as fractions in [0, 1]; flows are in "units" and
//! prices/costs in currency per unit.

mod catalog;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::qcqp::{Direction, QcqpError, QcqpModel, QuadExpr, Sense, VarId, VarKind};

pub use catalog::{catalog, catalog_names, catalog_with_base};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PoolingError {
    #[error("malformed network: {0}")]
    MalformedNetwork(String),
    #[error("no price supplied for output `{0}`")]
    MissingPrice(String),
    #[error("unknown catalog instance `{0}`")]
    UnknownInstance(String),
    #[error("catalog instance `{0}` needs a user-supplied base network file")]
    MissingBaseData(String),
    #[error(transparent)]
    Model(#[from] QcqpError),
}

/// One player's processing network: raw materials enter at input nodes, blend
/// in pools, and leave as finished goods at output nodes. Arcs only run
/// input->pool, input->output, and pool->output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolingInstance {
    pub inputs: Vec<String>,
    pub pools: Vec<String>,
    pub outputs: Vec<String>,
    pub arcs: Vec<(String, String)>,
    pub specs: Vec<String>,
    /// input -> spec -> concentration of the raw material (fraction).
    pub cin: BTreeMap<String, BTreeMap<String, f64>>,
    /// output -> spec -> minimum permissible concentration (default 0).
    pub cmin: BTreeMap<String, BTreeMap<String, f64>>,
    /// output -> spec -> maximum permissible concentration (default 1).
    pub cmax: BTreeMap<String, BTreeMap<String, f64>>,
    /// node -> minimum flow (default 0; > 0 on an input makes it semi-continuous).
    pub fmin: BTreeMap<String, f64>,
    /// node -> maximum flow (default unbounded).
    pub fmax: BTreeMap<String, f64>,
    /// input -> variable cost per unit purchased (default 0).
    pub cvar: BTreeMap<String, f64>,
    /// input -> lump-sum cost if any positive amount is purchased (default 0).
    pub cfixed: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    Input,
    Pool,
    Output,
}

impl PoolingInstance {
    pub fn cin(&self, input: &str, spec: &str) -> f64 {
        self.cin.get(input).and_then(|m| m.get(spec)).copied().unwrap_or(0.0)
    }

    pub fn cmin(&self, output: &str, spec: &str) -> f64 {
        self.cmin.get(output).and_then(|m| m.get(spec)).copied().unwrap_or(0.0)
    }

    pub fn cmax(&self, output: &str, spec: &str) -> f64 {
        self.cmax.get(output).and_then(|m| m.get(spec)).copied().unwrap_or(1.0)
    }

    pub fn fmin(&self, node: &str) -> f64 {
        self.fmin.get(node).copied().unwrap_or(0.0)
    }

    pub fn fmax(&self, node: &str) -> f64 {
        self.fmax.get(node).copied().unwrap_or(f64::INFINITY)
    }

    pub fn cvar(&self, input: &str) -> f64 {
        self.cvar.get(input).copied().unwrap_or(0.0)
    }

    pub fn cfixed(&self, input: &str) -> f64 {
        self.cfixed.get(input).copied().unwrap_or(0.0)
    }

    /// Inputs that need a purchase binary: a fixed cost or a positive minimum
    /// purchase makes the flow semi-continuous.
    pub fn semicontinuous_inputs(&self) -> Vec<&str> {
        self.inputs
            .iter()
            .filter(|i| self.cfixed(i) > 0.0 || self.fmin(i) > 0.0)
            .map(|s| s.as_str())
            .collect()
    }

    pub fn has_binaries(&self) -> bool {
        !self.semicontinuous_inputs().is_empty()
    }

    fn node_kind(&self, name: &str) -> Option<NodeKind> {
        if self.inputs.iter().any(|n| n == name) {
            Some(NodeKind::Input)
        } else if self.pools.iter().any(|n| n == name) {
            Some(NodeKind::Pool)
        } else if self.outputs.iter().any(|n| n == name) {
            Some(NodeKind::Output)
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<(), PoolingError> {
        let bad = |msg: String| Err(PoolingError::MalformedNetwork(msg));
        let mut seen = BTreeSet::new();
        for n in self.inputs.iter().chain(&self.pools).chain(&self.outputs) {
            if !seen.insert(n.clone()) {
                return bad(format!("duplicate node name `{n}`"));
            }
        }
        if self.outputs.is_empty() {
            return bad("network has no output nodes".into());
        }
        let mut arc_seen = BTreeSet::new();
        for (from, to) in &self.arcs {
            let (Some(kf), Some(kt)) = (self.node_kind(from), self.node_kind(to)) else {
                return bad(format!("dangling arc ({from}, {to})"));
            };
            let ok = matches!(
                (kf, kt),
                (NodeKind::Input, NodeKind::Pool)
                    | (NodeKind::Input, NodeKind::Output)
                    | (NodeKind::Pool, NodeKind::Output)
            );
            if !ok {
                return bad(format!("arc ({from}, {to}) is not input->pool, input->output, or pool->output"));
            }
            if !arc_seen.insert((from.clone(), to.clone())) {
                return bad(format!("duplicate arc ({from}, {to})"));
            }
        }
        for p in &self.pools {
            let has_in = self.arcs.iter().any(|(_, t)| t == p);
            let has_out = self.arcs.iter().any(|(f, _)| f == p);
            if !has_in || !has_out {
                return bad(format!("pool `{p}` lacks an inflow or outflow"));
            }
        }
        for (node, &lo) in &self.fmin {
            let hi = self.fmax(node);
            if lo < 0.0 || lo > hi {
                return bad(format!("flow bounds on `{node}` violate 0 <= fmin <= fmax"));
            }
        }
        for (input, specs) in &self.cin {
            for (spec, &c) in specs {
                if !(0.0..=1.0).contains(&c) {
                    return bad(format!("cin[{input}][{spec}] = {c} outside [0, 1]"));
                }
            }
        }
        for o in &self.outputs {
            for k in &self.specs {
                let lo = self.cmin(o, k);
                let hi = self.cmax(o, k);
                if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                    return bad(format!("spec bounds on ({o}, {k}) violate 0 <= cmin <= cmax <= 1"));
                }
            }
        }
        Ok(())
    }

    /// Largest flow a node can carry once the output caps are accounted for.
    fn node_cap(&self, node: &str, kind: NodeKind) -> f64 {
        match kind {
            NodeKind::Output => self.fmax(node),
            NodeKind::Pool => {
                let downstream: f64 = self
                    .arcs
                    .iter()
                    .filter(|(f, _)| f == node)
                    .map(|(_, t)| self.fmax(t))
                    .sum();
                self.fmax(node).min(downstream)
            }
            NodeKind::Input => {
                let downstream: f64 = self
                    .arcs
                    .iter()
                    .filter(|(f, _)| f == node)
                    .map(|(_, t)| self.node_cap(t, self.node_kind(t).unwrap()))
                    .sum();
                self.fmax(node).min(downstream)
            }
        }
    }
}

/// Fixed value or model variable; lets one builder serve both the
/// fixed-parameter subproblems and the master problems where prices or rival
/// outputs are decision variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueRef {
    Fixed(f64),
    Var(VarId),
}

/// Linear inverse demand market for one output stream: price = alpha - beta*q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Market {
    pub output: String,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Competition {
    PriceTaker,
    NashCournot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    pub players: Vec<PoolingInstance>,
    pub markets: Vec<Market>,
    pub mode: Competition,
}

impl GameInstance {
    pub fn market_for(&self, output: &str) -> Option<&Market> {
        self.markets.iter().find(|m| m.output == output)
    }

    /// Markets sorted by output node id; the documented draw order for
    /// seeded price generation.
    pub fn markets_sorted(&self) -> Vec<&Market> {
        let mut ms: Vec<&Market> = self.markets.iter().collect();
        ms.sort_by(|a, b| a.output.cmp(&b.output));
        ms
    }

    pub fn has_binaries(&self) -> bool {
        self.players.iter().any(|p| p.has_binaries())
    }

    pub fn validate(&self) -> Result<(), PoolingError> {
        let bad = |msg: String| Err(PoolingError::MalformedNetwork(msg));
        if self.players.is_empty() {
            return bad("game needs at least one player".into());
        }
        for p in &self.players {
            p.validate()?;
        }
        let mut names = BTreeSet::new();
        for m in &self.markets {
            if !names.insert(m.output.clone()) {
                return bad(format!("market `{}` defined twice", m.output));
            }
            if m.alpha <= 0.0 {
                return bad(format!("market `{}` needs alpha > 0", m.output));
            }
            if m.beta < 0.0 {
                return bad(format!("market `{}` needs beta >= 0", m.output));
            }
        }
        for (j, p) in self.players.iter().enumerate() {
            for o in &p.outputs {
                if self.market_for(o).is_none() {
                    return bad(format!("player {j} output `{o}` has no market"));
                }
            }
        }
        Ok(())
    }

    /// Total capacity of all players in one market's output node.
    pub fn market_capacity(&self, output: &str) -> f64 {
        self.players
            .iter()
            .map(|p| if p.outputs.iter().any(|o| o == output) { p.fmax(output) } else { 0.0 })
            .sum()
    }
}

/// Where a player's variables live inside some model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarMap {
    pub f_in: BTreeMap<String, VarId>,
    pub f_out: BTreeMap<String, VarId>,
    pub arc: BTreeMap<(String, String), VarId>,
    pub conc: BTreeMap<(String, String), VarId>,
    pub buy: BTreeMap<String, VarId>,
    /// All variable ids owned by this player, ascending.
    pub all: Vec<VarId>,
}

impl VarMap {
    /// Variable and fixed purchase cost as a linear expression.
    pub fn cost_expr(&self, player: &PoolingInstance) -> crate::qcqp::LinearExpr {
        let mut e = crate::qcqp::LinearExpr::new();
        for (input, &v) in &self.f_in {
            let c = player.cvar(input);
            if c != 0.0 {
                e.add_term(c, v);
            }
        }
        for (input, &u) in &self.buy {
            let c = player.cfixed(input);
            if c != 0.0 {
                e.add_term(c, u);
            }
        }
        e.canonicalize();
        e
    }

    pub fn cost_value(&self, player: &PoolingInstance, point: &[f64]) -> f64 {
        self.cost_expr(player).value(point)
    }

    pub fn output_values(&self, point: &[f64]) -> BTreeMap<String, f64> {
        self.f_out.iter().map(|(o, &v)| (o.clone(), point[v])).collect()
    }

    /// Extract this player's sub-vector from a full model point.
    pub fn extract(&self, point: &[f64]) -> Vec<f64> {
        self.all.iter().map(|&v| point[v]).collect()
    }
}

/// A player's feasible set as a standalone model (objective left zero).
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    pub model: QcqpModel,
    pub vars: VarMap,
}

/// Append one player's feasible set to `model`, labeling rows with `prefix`.
pub fn build_feasible_set_into(
    model: &mut QcqpModel,
    player: &PoolingInstance,
    prefix: &str,
) -> Result<VarMap, PoolingError> {
    player.validate()?;
    let first = model.num_vars();
    let mut vars = VarMap::default();

    for i in &player.inputs {
        let cap = player.node_cap(i, NodeKind::Input);
        let v = model.add_variable(0.0, cap, VarKind::Continuous)?;
        vars.f_in.insert(i.clone(), v);
    }
    for o in &player.outputs {
        let v = model.add_variable(0.0, player.fmax(o), VarKind::Continuous)?;
        vars.f_out.insert(o.clone(), v);
    }
    for (from, to) in &player.arcs {
        let cap_from = player.node_cap(from, player.node_kind(from).unwrap());
        let cap_to = player.node_cap(to, player.node_kind(to).unwrap());
        let v = model.add_variable(0.0, cap_from.min(cap_to), VarKind::Continuous)?;
        vars.arc.insert((from.clone(), to.clone()), v);
    }
    for p in &player.pools {
        for k in &player.specs {
            // blending keeps pool concentrations inside the hull of inflows
            let inflow_cins: Vec<f64> = player
                .arcs
                .iter()
                .filter(|(_, t)| t == p)
                .map(|(f, _)| player.cin(f, k))
                .collect();
            let lo = inflow_cins.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
            let hi = inflow_cins.iter().copied().fold(f64::NEG_INFINITY, f64::max).min(1.0);
            let v = model.add_variable(lo.min(hi), hi.max(lo), VarKind::Continuous)?;
            vars.conc.insert((p.clone(), k.clone()), v);
        }
    }
    for i in player.semicontinuous_inputs() {
        let v = model.add_variable(0.0, 1.0, VarKind::Binary)?;
        vars.buy.insert(i.to_string(), v);
    }
    vars.all = (first..model.num_vars()).collect();

    // (flow tracking) f_in equals the flow leaving each input
    for i in &player.inputs {
        let mut body = QuadExpr::new();
        body.add_linear(1.0, vars.f_in[i]);
        for ((from, to), &a) in &vars.arc {
            if from == i {
                body.add_linear(-1.0, a);
                let _ = to;
            }
        }
        model.add_constraint(body, Sense::Eq, 0.0, format!("{prefix}in_{i}"))?;
    }
    // (flow tracking) f_out equals the flow entering each output
    for o in &player.outputs {
        let mut body = QuadExpr::new();
        body.add_linear(1.0, vars.f_out[o]);
        for ((_, to), &a) in &vars.arc {
            if to == o {
                body.add_linear(-1.0, a);
            }
        }
        model.add_constraint(body, Sense::Eq, 0.0, format!("{prefix}out_{o}"))?;
    }
    // pool flow balance
    for p in &player.pools {
        let mut body = QuadExpr::new();
        for ((from, to), &a) in &vars.arc {
            if to == p {
                body.add_linear(1.0, a);
            }
            if from == p {
                body.add_linear(-1.0, a);
            }
        }
        model.add_constraint(body, Sense::Eq, 0.0, format!("{prefix}bal_{p}"))?;
    }
    // concentration balance per pool and spec: spec mass in = c * flow out
    for p in &player.pools {
        for k in &player.specs {
            let c = vars.conc[&(p.clone(), k.clone())];
            let mut body = QuadExpr::new();
            for ((from, to), &a) in &vars.arc {
                if to == p {
                    body.add_linear(player.cin(from, k), a);
                }
                if from == p {
                    body.add_bilinear(-1.0, c, a);
                }
            }
            model.add_constraint(body, Sense::Eq, 0.0, format!("{prefix}conc_{p}_{k}"))?;
        }
    }
    // output spec bounds: cmin * f_out <= spec mass in <= cmax * f_out
    for o in &player.outputs {
        for k in &player.specs {
            let mass = |player: &PoolingInstance, vars: &VarMap| {
                let mut body = QuadExpr::new();
                for ((from, to), &a) in &vars.arc {
                    if to != o {
                        continue;
                    }
                    match player.node_kind(from).unwrap() {
                        NodeKind::Input => {
                            body.add_linear(player.cin(from, k), a);
                        }
                        NodeKind::Pool => {
                            let c = vars.conc[&(from.clone(), k.clone())];
                            body.add_bilinear(1.0, c, a);
                        }
                        NodeKind::Output => unreachable!(),
                    }
                }
                body
            };
            let mut hi = mass(player, &vars);
            hi.add_linear(-player.cmax(o, k), vars.f_out[o]);
            model.add_constraint(hi, Sense::Le, 0.0, format!("{prefix}cmax_{o}_{k}"))?;
            let mut lo = mass(player, &vars);
            lo.add_linear(-player.cmin(o, k), vars.f_out[o]);
            model.add_constraint(lo, Sense::Ge, 0.0, format!("{prefix}cmin_{o}_{k}"))?;
        }
    }
    // semi-continuous inputs: fmin*u <= f_in <= fmax*u
    for i in player.semicontinuous_inputs() {
        let u = vars.buy[i];
        let cap = player.node_cap(i, NodeKind::Input);
        if !cap.is_finite() {
            return Err(PoolingError::MalformedNetwork(format!(
                "semi-continuous input `{i}` needs a finite capacity"
            )));
        }
        let mut hi = QuadExpr::new();
        hi.add_linear(1.0, vars.f_in[i]).add_linear(-cap, u);
        model.add_constraint(hi, Sense::Le, 0.0, format!("{prefix}semihi_{i}"))?;
        if player.fmin(i) > 0.0 {
            let mut lo = QuadExpr::new();
            lo.add_linear(1.0, vars.f_in[i]).add_linear(-player.fmin(i), u);
            model.add_constraint(lo, Sense::Ge, 0.0, format!("{prefix}semilo_{i}"))?;
        }
    }
    Ok(vars)
}

/// A player's feasible set as its own model; Eq-style constraints only, the
/// objective stays zero.
pub fn build_feasible_set(player: &PoolingInstance) -> Result<FeasibleSet, PoolingError> {
    let mut model = QcqpModel::new(Direction::Max);
    let vars = build_feasible_set_into(&mut model, player, "")?;
    Ok(FeasibleSet { model, vars })
}

/// Revenue at given prices minus variable and fixed costs. Linear when every
/// price is fixed; bilinear in (price, f_out) when prices are variables.
pub fn price_taker_objective(
    player: &PoolingInstance,
    vars: &VarMap,
    prices: &BTreeMap<String, ValueRef>,
) -> Result<QuadExpr, PoolingError> {
    let mut obj = QuadExpr::new();
    for (o, &f) in &vars.f_out {
        match prices.get(o) {
            Some(&ValueRef::Fixed(p)) => {
                obj.add_linear(p, f);
            }
            Some(&ValueRef::Var(pv)) => {
                obj.add_bilinear(1.0, pv, f);
            }
            None => return Err(PoolingError::MissingPrice(o.clone())),
        }
    }
    let cost = vars.cost_expr(player);
    obj.linear.add_expr(&cost.scaled(-1.0));
    Ok(obj.canonicalized())
}

/// Consumer surplus: sum over markets of alpha*q - beta*q^2/2 - pi*q.
pub fn consumer_surplus_objective(markets: &[Market], q: &[ValueRef], pi: &[ValueRef]) -> QuadExpr {
    assert_eq!(markets.len(), q.len());
    assert_eq!(markets.len(), pi.len());
    let mut obj = QuadExpr::new();
    for ((m, &qr), &pr) in markets.iter().zip(q).zip(pi) {
        match qr {
            ValueRef::Fixed(qv) => {
                obj.add_constant(m.alpha * qv - 0.5 * m.beta * qv * qv);
                match pr {
                    ValueRef::Fixed(pv) => {
                        obj.add_constant(-pv * qv);
                    }
                    ValueRef::Var(pv) => {
                        obj.add_linear(-qv, pv);
                    }
                }
            }
            ValueRef::Var(qv) => {
                obj.add_linear(m.alpha, qv);
                obj.add_bilinear(-0.5 * m.beta, qv, qv);
                match pr {
                    ValueRef::Fixed(pv) => {
                        obj.add_linear(-pv, qv);
                    }
                    ValueRef::Var(pv) => {
                        obj.add_bilinear(-1.0, pv, qv);
                    }
                }
            }
        }
    }
    obj.canonicalized()
}

/// Nash-Cournot payoff: each output sells at alpha - beta*(own + rivals).
/// Rival quantities may be fixed numbers (subproblem) or model variables
/// (master or monolithic model).
pub fn nash_cournot_objective(
    player: &PoolingInstance,
    vars: &VarMap,
    game: &GameInstance,
    rivals: &BTreeMap<String, Vec<ValueRef>>,
) -> Result<QuadExpr, PoolingError> {
    let mut obj = QuadExpr::new();
    for (o, &f) in &vars.f_out {
        let market = game
            .market_for(o)
            .ok_or_else(|| PoolingError::MissingPrice(o.clone()))?;
        obj.add_linear(market.alpha, f);
        obj.add_bilinear(-market.beta, f, f);
        if market.beta != 0.0 {
            for r in rivals.get(o).map(|v| v.as_slice()).unwrap_or(&[]) {
                match *r {
                    ValueRef::Fixed(qr) => {
                        obj.add_linear(-market.beta * qr, f);
                    }
                    ValueRef::Var(rv) => {
                        obj.add_bilinear(-market.beta, rv, f);
                    }
                }
            }
        }
    }
    let cost = vars.cost_expr(player);
    obj.linear.add_expr(&cost.scaled(-1.0));
    Ok(obj.canonicalized())
}

/// All players' feasible sets in one model, rows prefixed `p{j}_`.
pub fn assemble_players(game: &GameInstance) -> Result<(QcqpModel, Vec<VarMap>), PoolingError> {
    game.validate()?;
    let mut model = QcqpModel::new(Direction::Max);
    let mut maps = Vec::with_capacity(game.players.len());
    for (j, p) in game.players.iter().enumerate() {
        maps.push(build_feasible_set_into(&mut model, p, &format!("p{j}_"))?);
    }
    Ok((model, maps))
}

#[derive(Debug, Clone)]
pub struct WelfareModel {
    pub model: QcqpModel,
    pub player_vars: Vec<VarMap>,
    /// Market output -> consumed-quantity variable (empty in projected form).
    pub quantity: BTreeMap<String, VarId>,
}

/// Maximum social welfare model. With `projected` the consumed quantities are
/// substituted away; both forms have equal optima.
pub fn build_welfare_model(game: &GameInstance, projected: bool) -> Result<WelfareModel, PoolingError> {
    let (mut model, player_vars) = assemble_players(game)?;
    let mut obj = QuadExpr::new();
    let mut quantity = BTreeMap::new();
    for m in game.markets_sorted() {
        let suppliers: Vec<VarId> = player_vars
            .iter()
            .filter_map(|v| v.f_out.get(&m.output).copied())
            .collect();
        if suppliers.is_empty() {
            continue;
        }
        if projected {
            for &f in &suppliers {
                obj.add_linear(m.alpha, f);
            }
            for (i, &fi) in suppliers.iter().enumerate() {
                for &fj in &suppliers[i..] {
                    let coef = if fi == fj { -0.5 * m.beta } else { -m.beta };
                    obj.add_bilinear(coef, fi, fj);
                }
            }
        } else {
            let cap = game.market_capacity(&m.output);
            let q = model.add_variable(0.0, cap, VarKind::Continuous)?;
            quantity.insert(m.output.clone(), q);
            let mut link = QuadExpr::new();
            link.add_linear(1.0, q);
            for &f in &suppliers {
                link.add_linear(-1.0, f);
            }
            model.add_constraint(link, Sense::Eq, 0.0, format!("link_{}", m.output))?;
            obj.add_linear(m.alpha, q);
            obj.add_bilinear(-0.5 * m.beta, q, q);
        }
    }
    for (p, vars) in game.players.iter().zip(&player_vars) {
        obj.linear.add_expr(&vars.cost_expr(p).scaled(-1.0));
    }
    model.set_objective(obj, Direction::Max)?;
    Ok(WelfareModel { model, player_vars, quantity })
}

#[derive(Debug, Clone)]
pub struct MonolithicNcModel {
    pub model: QcqpModel,
    pub player_vars: Vec<VarMap>,
}

/// Monolithic Nash-Cournot model: the cross terms enter with half weight, so
/// its objective is NOT the sum of the players' payoffs, but its first-order
/// conditions aggregate the players' ones.
pub fn build_monolithic_nc_model(
    game: &GameInstance,
    impose_integrality: bool,
) -> Result<MonolithicNcModel, PoolingError> {
    let (mut model, player_vars) = assemble_players(game)?;
    let mut obj = QuadExpr::new();
    for m in game.markets_sorted() {
        let suppliers: Vec<VarId> = player_vars
            .iter()
            .filter_map(|v| v.f_out.get(&m.output).copied())
            .collect();
        for &f in &suppliers {
            obj.add_linear(m.alpha, f);
            obj.add_bilinear(-m.beta, f, f);
        }
        for (i, &fi) in suppliers.iter().enumerate() {
            for &fj in suppliers.iter().skip(i + 1) {
                obj.add_bilinear(-m.beta, fi, fj);
            }
        }
    }
    for (p, vars) in game.players.iter().zip(&player_vars) {
        obj.linear.add_expr(&vars.cost_expr(p).scaled(-1.0));
    }
    model.set_objective(obj, Direction::Max)?;
    if !impose_integrality {
        for vars in &player_vars {
            for &u in vars.buy.values() {
                model.variables[u].kind = VarKind::Continuous;
            }
        }
    }
    Ok(MonolithicNcModel { model, player_vars })
}

/// Price-taker payoff of a concrete point at concrete prices.
pub fn payoff_pt(
    player: &PoolingInstance,
    vars: &VarMap,
    point: &[f64],
    prices: &BTreeMap<String, f64>,
) -> Result<f64, PoolingError> {
    let mut revenue = 0.0;
    for (o, &f) in &vars.f_out {
        let p = prices.get(o).ok_or_else(|| PoolingError::MissingPrice(o.clone()))?;
        revenue += p * point[f];
    }
    Ok(revenue - vars.cost_value(player, point))
}

/// Nash-Cournot payoff of a concrete point given total rival quantities.
pub fn payoff_nc(
    player: &PoolingInstance,
    vars: &VarMap,
    point: &[f64],
    game: &GameInstance,
    rival_totals: &BTreeMap<String, f64>,
) -> Result<f64, PoolingError> {
    let mut value = 0.0;
    for (o, &fv) in &vars.f_out {
        let market = game
            .market_for(o)
            .ok_or_else(|| PoolingError::MissingPrice(o.clone()))?;
        let f = point[fv];
        let rivals = rival_totals.get(o).copied().unwrap_or(0.0);
        value += (market.alpha - market.beta * (f + rivals)) * f;
    }
    Ok(value - vars.cost_value(player, point))
}
