//! Incumbent refinement by fix-and-optimize: fix one endpoint of every
//! bilinear pair (and all binaries) at the incumbent, which leaves a model
//! that is linear except for objective squares of free variables; those are
//! handled with tangent cuts. Alternating which side of each pair is fixed
//! lets both factors move across rounds.
//!
//! Coordinate descent alone cannot improve incumbents whose variables are
//! chained by equality rows; this pass solves the restriction exactly and in
//! practice lands on the optimal vertex once the fixed side has converged.

use std::collections::{BTreeMap, BTreeSet};

use crate::lp::{solve_lp, LpOutcome, LpProblem, LpTolerances};
use crate::qcqp::{Direction, QcqpModel, VarId, VarKind};

/// Returns an improved feasible point and its minimization-sense objective,
/// or None when no strict improvement was found.
pub(crate) fn refine_incumbent(
    model: &QcqpModel,
    point: &[f64],
    obj_min: f64,
    sign: f64,
    feas_tol: f64,
) -> Option<(Vec<f64>, f64)> {
    let pairs: Vec<(VarId, VarId)> = model.bilinear_pairs();
    if pairs.is_empty() && model.variables.iter().all(|v| v.kind != VarKind::Binary) {
        return None; // purely linear models are already solved exactly
    }

    // vars whose square appears anywhere must be fixed unless the square is
    // objective-only with convex (minimization) curvature
    let mut must_fix: BTreeSet<VarId> = BTreeSet::new();
    for c in &model.constraints {
        for t in &c.body.bilinears {
            if t.var_a == t.var_b {
                must_fix.insert(t.var_a);
            }
        }
    }
    let mut obj_square_coef: BTreeMap<VarId, f64> = BTreeMap::new();
    for t in &model.objective.bilinears {
        if t.var_a == t.var_b {
            *obj_square_coef.entry(t.var_a).or_insert(0.0) += sign * t.coefficient;
        }
    }
    for (&v, &c) in &obj_square_coef {
        if c < 0.0 {
            must_fix.insert(v); // concave square under minimization: fix it
        }
    }
    for v in &model.variables {
        if v.kind == VarKind::Binary {
            must_fix.insert(v.id);
        }
    }

    let cross: Vec<(VarId, VarId)> = pairs.iter().copied().filter(|&(a, b)| a != b).collect();
    // greedy vertex cover by pair frequency
    let mut degree: BTreeMap<VarId, usize> = BTreeMap::new();
    for &(a, b) in &cross {
        *degree.entry(a).or_insert(0) += 1;
        *degree.entry(b).or_insert(0) += 1;
    }
    let mut cover: BTreeSet<VarId> = must_fix.clone();
    for &(a, b) in &cross {
        if cover.contains(&a) || cover.contains(&b) {
            continue;
        }
        let pick = if degree[&a] >= degree[&b] { a } else { b };
        cover.insert(pick);
    }
    // the alternate round fixes, per pair, an endpoint complementary to the
    // first cover where possible
    let mut alt: BTreeSet<VarId> = must_fix.clone();
    for &(a, b) in &cross {
        if alt.contains(&a) || alt.contains(&b) {
            continue;
        }
        let pick = if cover.contains(&a) && !cover.contains(&b) {
            b
        } else if cover.contains(&b) && !cover.contains(&a) {
            a
        } else {
            b
        };
        alt.insert(pick);
    }

    let mut best_point = point.to_vec();
    let mut best_obj = obj_min;
    let mut improved = false;
    for round in 0..4 {
        let fixed = if round % 2 == 0 { &cover } else { &alt };
        if let Some((cand, cand_obj)) = solve_restriction(model, &best_point, fixed, sign, feas_tol) {
            if cand_obj < best_obj - 1e-10 * (1.0 + best_obj.abs()) {
                best_point = cand;
                best_obj = cand_obj;
                improved = true;
            }
        }
    }
    if improved {
        Some((best_point, best_obj))
    } else {
        None
    }
}

/// Fix `fixed` variables at the incumbent values and solve what remains:
/// linear rows plus objective squares approximated from below by tangents,
/// tightened Kelley-style until the approximation stops promising progress.
fn solve_restriction(
    model: &QcqpModel,
    point: &[f64],
    fixed: &BTreeSet<VarId>,
    sign: f64,
    feas_tol: f64,
) -> Option<(Vec<f64>, f64)> {
    let n = model.num_vars();
    let mut lp = LpProblem::new(Direction::Min);
    for v in &model.variables {
        if fixed.contains(&v.id) {
            let x = point[v.id].clamp(v.lower, v.upper);
            lp.add_col(x, x);
        } else {
            lp.add_col(v.lower, v.upper);
        }
    }
    for c in &model.constraints {
        let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        let mut constant = c.body.linear.constant;
        for &(co, v) in &c.body.linear.terms {
            *coeffs.entry(v).or_insert(0.0) += co;
        }
        for t in &c.body.bilinears {
            let (a, b) = (t.var_a, t.var_b);
            match (fixed.contains(&a), fixed.contains(&b)) {
                (true, true) => constant += t.coefficient * point[a] * point[b],
                (true, false) => *coeffs.entry(b).or_insert(0.0) += t.coefficient * point[a],
                (false, true) => *coeffs.entry(a).or_insert(0.0) += t.coefficient * point[b],
                (false, false) => return None, // cover failed; bail out
            }
        }
        let row: Vec<(usize, f64)> = coeffs.into_iter().collect();
        lp.add_row(row, c.sense, c.rhs - constant);
    }
    // objective: linear part plus cross terms with one side fixed; squares of
    // free variables get an epigraph column with tangent rows
    let mut obj: BTreeMap<usize, f64> = BTreeMap::new();
    for &(co, v) in &model.objective.linear.terms {
        *obj.entry(v).or_insert(0.0) += sign * co;
    }
    let mut square_aux: BTreeMap<VarId, usize> = BTreeMap::new();
    for t in &model.objective.bilinears {
        let (a, b) = (t.var_a, t.var_b);
        let c = sign * t.coefficient;
        if a == b && !fixed.contains(&a) {
            let (lo, hi) = (model.variables[a].lower, model.variables[a].upper);
            let w = *square_aux.entry(a).or_insert_with(|| {
                let cap = lo.abs().max(hi.abs());
                lp.add_col(f64::NEG_INFINITY, cap * cap)
            });
            *obj.entry(w).or_insert(0.0) += c;
            continue;
        }
        match (fixed.contains(&a), fixed.contains(&b)) {
            (true, true) => {}
            (true, false) => *obj.entry(b).or_insert(0.0) += c * point[a],
            (false, true) => *obj.entry(a).or_insert(0.0) += c * point[b],
            (false, false) => return None,
        }
    }
    let mut objective = crate::qcqp::LinearExpr::new();
    for (v, c) in obj {
        objective.add_term(c, v);
    }
    lp.objective = objective;

    let tangent = |lp: &mut LpProblem, v: VarId, w: usize, at: f64| {
        // w >= 2*at*q - at^2
        lp.add_row(vec![(w, 1.0), (v, -2.0 * at)], crate::qcqp::Sense::Ge, -at * at);
    };
    for (&v, &w) in &square_aux {
        let (lo, hi) = (model.variables[v].lower, model.variables[v].upper);
        for at in [lo, hi, point[v]] {
            if at.is_finite() {
                tangent(&mut lp, v, w, at);
            }
        }
    }

    let tol = LpTolerances::default();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _kelley in 0..12 {
        let sol = match solve_lp(&lp, &tol) {
            Ok(LpOutcome::Optimal(s)) => s,
            _ => return best,
        };
        let mut cand: Vec<f64> = sol.point[..n].to_vec();
        for v in fixed {
            cand[*v] = point[*v].clamp(model.variables[*v].lower, model.variables[*v].upper);
        }
        let true_obj = sign * model.objective.value(&cand);
        let ok = model
            .max_scaled_violation(&cand)
            .map(|viol| viol <= feas_tol)
            .unwrap_or(false);
        if ok && best.as_ref().map_or(true, |(_, b)| true_obj < *b) {
            best = Some((cand.clone(), true_obj));
        }
        if square_aux.is_empty() {
            break;
        }
        // tighten the tangent model at the new iterate; stop when the LP's
        // lower estimate already matches the true value
        let mut gap = 0.0f64;
        for (&v, &w) in &square_aux {
            gap = gap.max(cand[v] * cand[v] - sol.point[w]);
            tangent(&mut lp, v, w, cand[v]);
        }
        if gap <= 1e-10 * (1.0 + true_obj.abs()) {
            break;
        }
    }
    best
}
