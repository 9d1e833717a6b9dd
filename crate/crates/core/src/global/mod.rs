//! Global optimization of bilinear QCQP models: McCormick relaxation plus
//! spatial branch-and-bound, with binary branching ahead of box splitting.
//!
//! Node selection is best-bound with depth-first plunging until the first
//! incumbent. Feasibility-based box reduction runs once at the root.

mod refine;
mod relaxation;

use std::time::{Duration, Instant};

use crate::lp::{solve_lp, solve_lp_warm, LpBasis, LpOutcome, LpTolerances};
use crate::qcqp::{Direction, QcqpModel, VarKind};

pub use relaxation::{build_relaxation, Relaxation};

pub const DEFAULT_REL_GAP: f64 = 1e-4;
pub const FEAS_TOL: f64 = 1e-6;
pub const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GlobalError {
    #[error("bilinear variable {0} has an unbounded box")]
    UnboundedBilinearVariable(usize),
    #[error("node has no branching candidate")]
    NoBranchCandidate,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub rel_gap: f64,
    /// Additional absolute gap that also terminates the search; 0 disables.
    pub abs_gap: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub feas_tol: f64,
    pub int_tol: f64,
    pub polish: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rel_gap: DEFAULT_REL_GAP,
            abs_gap: 0.0,
            time_limit: None,
            node_limit: None,
            feas_tol: FEAS_TOL,
            int_tol: INT_TOL,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    GapLimit,
    TimeLimit,
    Infeasible,
    UnboundedBox,
}

/// Primal and dual bounds are reported in the model's own direction: for
/// maximization primal <= dual, for minimization primal >= dual.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub point: Option<Vec<f64>>,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub nodes: usize,
    pub wall: Duration,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn has_point(&self) -> bool {
        self.point.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub boxes: Vec<(f64, f64)>,
    /// Dual bound inherited from the parent, in minimization sense.
    pub bound: f64,
    pub depth: usize,
    basis: Option<LpBasis>,
}

impl Node {
    pub fn root(boxes: Vec<(f64, f64)>) -> Self {
        Node { boxes, bound: f64::NEG_INFINITY, depth: 0, basis: None }
    }
}

/// Split a node per the branching rule: the most fractional unfixed binary if
/// any, otherwise the variable with the largest accumulated McCormick
/// violation, split at the relaxation value clamped into the middle 60% of
/// its box. Ties break toward the lowest variable index.
pub fn branch(
    model: &QcqpModel,
    relax: &Relaxation,
    node: &Node,
    lp_point: &[f64],
) -> Result<(Node, Node), GlobalError> {
    let n = model.num_vars();
    let mut best_bin: Option<(usize, f64)> = None;
    for v in &model.variables {
        if v.kind != VarKind::Binary {
            continue;
        }
        let (lo, hi) = node.boxes[v.id];
        if hi - lo < 0.5 {
            continue; // fixed
        }
        let frac = (lp_point[v.id] - lp_point[v.id].round()).abs();
        if frac > INT_TOL && best_bin.map_or(true, |(_, f)| frac > f) {
            best_bin = Some((v.id, frac));
        }
    }
    if let Some((v, _)) = best_bin {
        let mut zero = node.boxes.clone();
        zero[v] = (0.0, 0.0);
        let mut one = node.boxes.clone();
        one[v] = (1.0, 1.0);
        let child = |boxes| Node { boxes, bound: node.bound, depth: node.depth + 1, basis: node.basis.clone() };
        return Ok((child(zero), child(one)));
    }

    let mut score = vec![0.0f64; n];
    for (&(a, b), &col) in relax.aux_map() {
        let w = lp_point[col];
        let viol = (w - lp_point[a] * lp_point[b]).abs();
        score[a] += viol;
        if b != a {
            score[b] += viol;
        }
    }
    let mut pick: Option<usize> = None;
    for v in 0..n {
        let (lo, hi) = node.boxes[v];
        if hi - lo <= 1e-9 * (1.0 + hi.abs().max(lo.abs())) {
            continue;
        }
        if score[v] > 0.0 && pick.map_or(true, |p| score[v] > score[p]) {
            pick = Some(v);
        }
    }
    let Some(v) = pick else {
        return Err(GlobalError::NoBranchCandidate);
    };
    let (lo, hi) = node.boxes[v];
    let width = hi - lo;
    let split = lp_point[v].clamp(lo + 0.2 * width, hi - 0.2 * width);
    let mut left = node.boxes.clone();
    left[v] = (lo, split);
    let mut right = node.boxes.clone();
    right[v] = (split, hi);
    let child = |boxes| Node { boxes, bound: node.bound, depth: node.depth + 1, basis: node.basis.clone() };
    Ok((child(left), child(right)))
}

pub fn solve_global(model: &QcqpModel, opts: &SolveOptions) -> SolveResult {
    solve_global_with_callback(model, opts, &mut |_, _| {})
}

/// `on_incumbent(point, objective)` fires for every strictly improving
/// incumbent; it must be reentrant-safe for the caller.
pub fn solve_global_with_callback(
    model: &QcqpModel,
    opts: &SolveOptions,
    on_incumbent: &mut dyn FnMut(&[f64], f64),
) -> SolveResult {
    let start = Instant::now();
    let sign = match model.direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    let n = model.num_vars();
    let finish = |status, point: Option<Vec<f64>>, primal_min: f64, dual_min: f64, nodes| {
        let gap = rel_gap_of(primal_min, dual_min);
        SolveResult {
            status,
            point,
            primal: sign * primal_min,
            dual: sign * dual_min,
            gap,
            nodes,
            wall: start.elapsed(),
        }
    };

    // boxes for every bilinear or binary variable must be finite
    let pairs = model.bilinear_pairs();
    let mut needs_box = vec![false; n];
    for &(a, b) in &pairs {
        needs_box[a] = true;
        needs_box[b] = true;
    }
    for v in &model.variables {
        if needs_box[v.id] && !(v.lower.is_finite() && v.upper.is_finite()) {
            return finish(SolveStatus::UnboundedBox, None, f64::INFINITY, f64::NEG_INFINITY, 0);
        }
    }

    let root_boxes: Vec<(f64, f64)> = model.variables.iter().map(|v| (v.lower, v.upper)).collect();
    let root_boxes = match root_tighten(model, root_boxes, opts.int_tol) {
        Some(b) => b,
        None => return finish(SolveStatus::Infeasible, None, f64::INFINITY, f64::INFINITY, 0),
    };

    let lp_tol = LpTolerances::default();
    let mut open: Vec<Node> = vec![Node::root(root_boxes)];
    let mut incumbent: Option<Vec<f64>> = None;
    let mut primal = f64::INFINITY; // minimization sense
    let mut nodes = 0usize;
    // best bound among nodes dropped without proof (LP breakdown); the final
    // dual bound must not claim more than these allow
    let mut lost_bound = f64::INFINITY;

    loop {
        if open.is_empty() {
            return if incumbent.is_some() {
                let dual = lost_bound.min(primal);
                let status = if gap_rel_ok(primal, dual, opts) { SolveStatus::Optimal } else { SolveStatus::GapLimit };
                finish(status, incumbent, primal, dual, nodes)
            } else if lost_bound.is_finite() {
                finish(SolveStatus::GapLimit, None, f64::INFINITY, lost_bound, nodes)
            } else {
                finish(SolveStatus::Infeasible, None, f64::INFINITY, f64::INFINITY, nodes)
            };
        }
        // regions outside the open set are either fathomed against the
        // incumbent or had their optimum attained, so the incumbent itself
        // caps how low the valid bound needs to reach
        let dual = open.iter().fold(lost_bound, |a, nd| a.min(nd.bound)).min(primal);
        if incumbent.is_some() {
            if gap_rel_ok(primal, dual, opts) {
                return finish(SolveStatus::Optimal, incumbent, primal, dual, nodes);
            }
            if opts.abs_gap > 0.0 && primal - dual <= opts.abs_gap {
                return finish(SolveStatus::GapLimit, incumbent, primal, dual, nodes);
            }
        }
        if let Some(limit) = opts.node_limit {
            if nodes >= limit {
                return finish(SolveStatus::GapLimit, incumbent, primal, dual, nodes);
            }
        }
        if let Some(limit) = opts.time_limit {
            if start.elapsed() >= limit {
                return finish(SolveStatus::TimeLimit, incumbent, primal, dual, nodes);
            }
        }

        let idx = if incumbent.is_none() {
            open.len() - 1 // plunge
        } else {
            let mut best = 0;
            for (i, nd) in open.iter().enumerate() {
                if nd.bound < open[best].bound {
                    best = i;
                }
            }
            best
        };
        let node = open.swap_remove(idx);
        let trace = std::env::var_os("POOLEQ_TRACE_BNB").is_some();
        if trace && (nodes < 50 || nodes % 20000 == 0) {
            eprintln!("[bnb] n {} pop depth {} bound {:.4} primal {:.4} dual {:.4} open {}", nodes, node.depth, node.bound, primal, dual, open.len());
        }
        if incumbent.is_some() && node.bound >= primal - fathom_margin(primal) {
            continue;
        }

        let relax = match build_relaxation(model, &node.boxes) {
            Ok(r) => r,
            Err(GlobalError::UnboundedBilinearVariable(_)) => {
                return finish(SolveStatus::UnboundedBox, None, f64::INFINITY, f64::NEG_INFINITY, nodes);
            }
            Err(_) => unreachable!(),
        };
        nodes += 1;
        let lp_result = match &node.basis {
            Some(basis) => solve_lp_warm(&relax.lp, basis, &lp_tol),
            None => solve_lp(&relax.lp, &lp_tol),
        };
        let sol = match lp_result {
            Ok(LpOutcome::Optimal(s)) => s,
            Ok(LpOutcome::Infeasible { .. }) => continue,
            Ok(LpOutcome::Unbounded { .. }) => {
                return finish(SolveStatus::UnboundedBox, incumbent, primal, f64::NEG_INFINITY, nodes);
            }
            Err(_) => {
                // numerical breakdown in a node LP: drop the node but keep
                // its inherited bound so the final dual bound stays valid
                lost_bound = lost_bound.min(node.bound);
                continue;
            }
        };
        // the LP reports in the model's direction; the search works min-sense
        let node_bound = node.bound.max(sign * sol.objective);
        if incumbent.is_some() && node_bound >= primal - fathom_margin(primal) {
            continue;
        }

        let point = &sol.point[..n];
        let exact = envelope_exact(model, &relax, &sol.point, opts);
        if exact {
            let mut cand: Vec<f64> = point.to_vec();
            for v in &model.variables {
                if v.kind == VarKind::Binary {
                    cand[v.id] = cand[v.id].round();
                }
            }
            if feasible_enough(model, &cand, opts.feas_tol) {
                let mut obj = sign * model.objective.value(&cand);
                if opts.polish {
                    if let Some((better, better_obj)) = polish(model, &cand, obj, sign, opts.feas_tol) {
                        cand = better;
                        obj = better_obj;
                    }
                    if let Some((better, better_obj)) = (!std::env::var_os("POOLEQ_NO_REFINE").is_some())
                        .then(|| refine::refine_incumbent(model, &cand, obj, sign, opts.feas_tol))
                        .flatten()
                    {
                        cand = better;
                        obj = better_obj;
                    }
                }
                if obj < primal {
                    primal = obj;
                    incumbent = Some(cand.clone());
                    on_incumbent(&cand, sign * obj);
                    if std::env::var_os("POOLEQ_TRACE_BNB").is_some() {
                        eprintln!("[bnb] incumbent {:.4} at node bound {:.4}", obj, node_bound);
                    }
                }
            }
            continue; // the node's relaxation optimum is attained
        }

        let child_node = Node {
            boxes: node.boxes,
            bound: node_bound,
            depth: node.depth,
            basis: Some(sol.basis),
        };
        match branch(model, &relax, &child_node, &sol.point) {
            Ok((a, b)) => {
                let (first, second) = order_children(a, b, point);
                open.push(first);
                open.push(second);
            }
            Err(GlobalError::NoBranchCandidate) => {
                // box is already a point but the envelope still disagrees:
                // numerics; drop the node without claiming a proof
                lost_bound = lost_bound.min(node_bound);
                continue;
            }
            Err(_) => unreachable!(),
        }
    }
}

fn order_children(a: Node, b: Node, point: &[f64]) -> (Node, Node) {
    // push the child containing the LP point last so plunging pops it first
    let contains = |nd: &Node| {
        nd.boxes
            .iter()
            .zip(point)
            .all(|(&(lo, hi), &x)| x >= lo - 1e-9 && x <= hi + 1e-9)
    };
    if contains(&b) {
        (a, b)
    } else {
        (b, a)
    }
}

fn rel_gap_of(primal_min: f64, dual_min: f64) -> f64 {
    if !primal_min.is_finite() || !dual_min.is_finite() {
        return f64::INFINITY;
    }
    (primal_min - dual_min).max(0.0) / f64::max(1.0, dual_min.abs())
}

fn gap_rel_ok(primal_min: f64, dual_min: f64, opts: &SolveOptions) -> bool {
    if !dual_min.is_finite() {
        return primal_min == dual_min;
    }
    primal_min - dual_min <= opts.rel_gap * f64::max(1.0, dual_min.abs())
}

fn fathom_margin(primal_min: f64) -> f64 {
    1e-9 * (1.0 + primal_min.abs())
}

fn envelope_exact(model: &QcqpModel, relax: &Relaxation, lp_point: &[f64], opts: &SolveOptions) -> bool {
    for v in &model.variables {
        if v.kind == VarKind::Binary {
            let x = lp_point[v.id];
            if (x - x.round()).abs() > opts.int_tol {
                return false;
            }
        }
    }
    for (&(a, b), &col) in relax.aux_map() {
        let prod = lp_point[a] * lp_point[b];
        if (lp_point[col] - prod).abs() > 0.1 * opts.feas_tol * (1.0 + prod.abs()) {
            return false;
        }
    }
    true
}

fn feasible_enough(model: &QcqpModel, point: &[f64], feas_tol: f64) -> bool {
    match model.max_scaled_violation(point) {
        Ok(v) => v <= feas_tol,
        Err(_) => false,
    }
}

/// One projected coordinate-descent pass over continuous variables, keeping
/// binaries fixed; a move is accepted only when the whole point stays
/// feasible and the (minimization-sense) objective strictly improves.
fn polish(
    model: &QcqpModel,
    point: &[f64],
    obj_min: f64,
    sign: f64,
    feas_tol: f64,
) -> Option<(Vec<f64>, f64)> {
    let mut x = point.to_vec();
    let mut best = obj_min;
    let mut improved_any = false;
    for _sweep in 0..3 {
        let mut improved = false;
        for v in &model.variables {
            if v.kind == VarKind::Binary {
                continue;
            }
            let (lo, hi) = (v.lower, v.upper);
            if !(lo.is_finite() && hi.is_finite()) || hi - lo <= 0.0 {
                continue;
            }
            // objective along coordinate v: a t^2 + b t + c (minimization)
            let mut a = 0.0;
            let mut b = 0.0;
            for t in &model.objective.bilinears {
                if t.var_a == v.id && t.var_b == v.id {
                    a += sign * t.coefficient;
                } else if t.var_a == v.id {
                    b += sign * t.coefficient * x[t.var_b];
                } else if t.var_b == v.id {
                    b += sign * t.coefficient * x[t.var_a];
                }
            }
            for &(c, var) in &model.objective.linear.terms {
                if var == v.id {
                    b += sign * c;
                }
            }
            let mut candidates = [lo, hi, x[v.id], x[v.id]];
            if a.abs() > 1e-14 {
                candidates[3] = (-b / (2.0 * a)).clamp(lo, hi);
            }
            let current = x[v.id];
            for cand in candidates {
                if (cand - current).abs() <= 1e-12 * (1.0 + current.abs()) {
                    continue;
                }
                let delta = a * (cand * cand - current * current) + b * (cand - current);
                if delta >= -1e-12 * (1.0 + best.abs()) {
                    continue;
                }
                let old = x[v.id];
                x[v.id] = cand;
                if feasible_enough(model, &x, feas_tol) {
                    best += delta;
                    improved = true;
                    improved_any = true;
                    break;
                }
                x[v.id] = old;
            }
        }
        if !improved {
            break;
        }
    }
    if improved_any {
        let exact = sign * model.objective.value(&x);
        if exact < obj_min {
            return Some((x, exact));
        }
    }
    None
}

/// Feasibility-based box reduction from purely linear rows; a handful of
/// sweeps at the root only. Returns None when a box empties (infeasible).
fn root_tighten(model: &QcqpModel, mut boxes: Vec<(f64, f64)>, int_tol: f64) -> Option<Vec<(f64, f64)>> {
    for _sweep in 0..5 {
        let mut changed = false;
        for c in &model.constraints {
            if !c.body.bilinears.is_empty() {
                continue;
            }
            let terms = &c.body.linear.terms;
            let constant = c.body.linear.constant;
            // treat as lhs <= rhs and/or lhs >= rhs
            let passes: &[(f64, f64)] = match c.sense {
                crate::qcqp::Sense::Le => &[(1.0, c.rhs)],
                crate::qcqp::Sense::Ge => &[(-1.0, -c.rhs)],
                crate::qcqp::Sense::Eq => &[(1.0, c.rhs), (-1.0, -c.rhs)],
            };
            for &(sgn, rhs) in passes {
                // min activity of sgn*(constant + sum a_j x_j)
                let mut min_act = sgn * constant;
                let mut n_inf = 0;
                for &(a, j) in terms {
                    let (lo, hi) = boxes[j];
                    let contrib = if sgn * a >= 0.0 { sgn * a * lo } else { sgn * a * hi };
                    if contrib.is_finite() {
                        min_act += contrib;
                    } else {
                        n_inf += 1;
                    }
                }
                for &(a, j) in terms {
                    let sa = sgn * a;
                    if sa == 0.0 {
                        continue;
                    }
                    let (lo, hi) = boxes[j];
                    let own = if sa >= 0.0 { sa * lo } else { sa * hi };
                    let others = if own.is_finite() {
                        if n_inf > 0 {
                            continue;
                        }
                        min_act - own
                    } else {
                        if n_inf > 1 {
                            continue;
                        }
                        min_act
                    };
                    // sa * x_j <= rhs - others
                    let cap = rhs - others;
                    if sa > 0.0 {
                        let new_hi = cap / sa;
                        if new_hi < hi - 1e-12 * (1.0 + hi.abs()) {
                            boxes[j] = (lo, new_hi.max(lo));
                            changed = true;
                        }
                    } else {
                        let new_lo = cap / sa;
                        if new_lo > lo + 1e-12 * (1.0 + lo.abs()) {
                            boxes[j] = (new_lo.min(hi), hi);
                            changed = true;
                        }
                    }
                }
            }
        }
        for v in &model.variables {
            let (lo, hi) = boxes[v.id];
            if v.kind == VarKind::Binary {
                let lo2 = if lo > int_tol { 1.0 } else { 0.0 };
                let hi2 = if hi < 1.0 - int_tol { 0.0 } else { 1.0 };
                if lo2 > hi2 {
                    return None;
                }
                boxes[v.id] = (lo2, hi2);
            }
            if lo > hi + 1e-9 * (1.0 + hi.abs()) {
                return None;
            }
            if lo > hi {
                boxes[v.id] = (hi, hi);
            }
        }
        if !changed {
            break;
        }
    }
    Some(boxes)
}

#[cfg(test)]
mod tests;
