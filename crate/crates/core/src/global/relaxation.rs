//! McCormick relaxation of a bilinear model over a box.

use std::collections::BTreeMap;

use super::GlobalError;
use crate::lp::LpProblem;
use crate::qcqp::{LinearExpr, QcqpModel, QuadExpr, Sense, VarId};

/// LP relaxation of a model on a node's boxes. Every distinct bilinear pair
/// (a, b) gets one auxiliary LP column standing for x_a * x_b, constrained by
/// the four McCormick rows over the pair's boxes.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub lp: LpProblem,
    aux: BTreeMap<(VarId, VarId), usize>,
}

impl Relaxation {
    pub fn aux_map(&self) -> &BTreeMap<(VarId, VarId), usize> {
        &self.aux
    }

    pub fn aux_col(&self, a: VarId, b: VarId) -> Option<usize> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.aux.get(&key).copied()
    }

    /// |w - x*y| per pair at an LP point, ascending pair order.
    pub fn violations(&self, lp_point: &[f64]) -> Vec<((VarId, VarId), f64)> {
        self.aux
            .iter()
            .map(|(&(a, b), &col)| ((a, b), (lp_point[col] - lp_point[a] * lp_point[b]).abs()))
            .collect()
    }
}

fn linearize(expr: &QuadExpr, aux: &BTreeMap<(VarId, VarId), usize>) -> LinearExpr {
    let mut out = expr.linear.clone();
    for t in &expr.bilinears {
        out.add_term(t.coefficient, aux[&t.pair()]);
    }
    out.canonicalize();
    out
}

/// Build the node LP: model rows with bilinear terms replaced by their
/// auxiliary columns, plus four McCormick rows per distinct pair:
///   w >= xL*y + yL*x - xL*yL      w >= xU*y + yU*x - xU*yU
///   w <= xU*y + yL*x - xU*yL      w <= xL*y + yU*x - xL*yU
/// A degenerate box (xL = xU = c) collapses them to the exact row w = c*y.
pub fn build_relaxation(model: &QcqpModel, boxes: &[(f64, f64)]) -> Result<Relaxation, GlobalError> {
    debug_assert_eq!(boxes.len(), model.num_vars());
    let pairs = model.bilinear_pairs();
    for &(a, b) in &pairs {
        for v in [a, b] {
            let (lo, hi) = boxes[v];
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(GlobalError::UnboundedBilinearVariable(v));
            }
        }
    }

    let mut lp = LpProblem::new(model.direction);
    for v in &model.variables {
        let (lo, hi) = boxes[v.id];
        lp.add_col(lo, hi);
    }
    let mut aux = BTreeMap::new();
    for &(a, b) in &pairs {
        let (xl, xu) = boxes[a];
        let (yl, yu) = boxes[b];
        let corners = [xl * yl, xl * yu, xu * yl, xu * yu];
        let wlo = corners.iter().fold(f64::INFINITY, |m, &c| m.min(c));
        let whi = corners.iter().fold(f64::NEG_INFINITY, |m, &c| m.max(c));
        let w = lp.add_col(wlo, whi);
        aux.insert((a, b), w);
        let mut row = |cx: f64, cy: f64, sense: Sense, rhs: f64| {
            let mut coeffs = vec![(w, 1.0)];
            if a == b {
                coeffs.push((a, -(cx + cy)));
            } else {
                coeffs.push((a, -cx));
                coeffs.push((b, -cy));
            }
            lp.add_row(coeffs, sense, rhs);
        };
        row(yl, xl, Sense::Ge, -xl * yl);
        row(yu, xu, Sense::Ge, -xu * yu);
        row(yl, xu, Sense::Le, -xu * yl);
        row(yu, xl, Sense::Le, -xl * yu);
    }
    for c in &model.constraints {
        let body = linearize(&c.body, &aux);
        let coeffs: Vec<(usize, f64)> = body.terms.iter().map(|&(co, v)| (v, co)).collect();
        lp.add_row(coeffs, c.sense, c.rhs - body.constant);
    }
    lp.objective = linearize(&model.objective, &aux);
    Ok(Relaxation { lp, aux })
}
