//! Solver-independent representation of mixed-integer quadratically
//! constrained models with explicit bilinear structure.
//!
//! Bilinear terms are kept first-class (not folded into a dense Q matrix):
//! both the relaxation builder and the master-problem builder need per-term
//! access to attach McCormick auxiliaries.

use serde::{Deserialize, Serialize};

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

impl Variable {
    pub fn is_binary(&self) -> bool {
        self.kind == VarKind::Binary
    }
}

/// coefficient * x[var_a] * x[var_b], canonically ordered var_a <= var_b.
/// Squares are allowed via var_a == var_b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearTerm {
    pub coefficient: f64,
    pub var_a: VarId,
    pub var_b: VarId,
}

impl BilinearTerm {
    pub fn new(coefficient: f64, a: VarId, b: VarId) -> Self {
        let (var_a, var_b) = if a <= b { (a, b) } else { (b, a) };
        BilinearTerm { coefficient, var_a, var_b }
    }

    pub fn pair(&self) -> (VarId, VarId) {
        (self.var_a, self.var_b)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearExpr {
    pub constant: f64,
    /// (coefficient, variable) pairs; canonical form is sorted by variable
    /// with duplicates merged and zero coefficients dropped.
    pub terms: Vec<(f64, VarId)>,
}

impl LinearExpr {
    pub fn new() -> Self {
        LinearExpr::default()
    }

    pub fn constant(c: f64) -> Self {
        LinearExpr { constant: c, terms: Vec::new() }
    }

    pub fn term(coefficient: f64, var: VarId) -> Self {
        LinearExpr { constant: 0.0, terms: vec![(coefficient, var)] }
    }

    pub fn add_term(&mut self, coefficient: f64, var: VarId) -> &mut Self {
        self.terms.push((coefficient, var));
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        LinearExpr {
            constant: self.constant * s,
            terms: self.terms.iter().map(|&(c, v)| (c * s, v)).collect(),
        }
    }

    pub fn add_expr(&mut self, other: &LinearExpr) -> &mut Self {
        self.constant += other.constant;
        self.terms.extend_from_slice(&other.terms);
        self
    }

    /// Merge duplicate variables, drop zero coefficients, sort by variable.
    pub fn canonicalize(&mut self) {
        self.terms.sort_by_key(|&(_, v)| v);
        let mut merged: Vec<(f64, VarId)> = Vec::with_capacity(self.terms.len());
        for &(c, v) in &self.terms {
            match merged.last_mut() {
                Some(last) if last.1 == v => last.0 += c,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|&(c, _)| c != 0.0);
        self.terms = merged;
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.terms.iter().map(|&(_, v)| v).max()
    }

    /// Sum of terms in ascending variable order (canonical order), then the
    /// constant. The summation order is part of the contract.
    pub fn value(&self, point: &[f64]) -> f64 {
        let mut acc = self.constant;
        for &(c, v) in &self.terms {
            acc += c * point[v];
        }
        acc
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadExpr {
    pub linear: LinearExpr,
    pub bilinears: Vec<BilinearTerm>,
}

impl QuadExpr {
    pub fn new() -> Self {
        QuadExpr::default()
    }

    pub fn from_linear(linear: LinearExpr) -> Self {
        QuadExpr { linear, bilinears: Vec::new() }
    }

    pub fn add_linear(&mut self, coefficient: f64, var: VarId) -> &mut Self {
        self.linear.add_term(coefficient, var);
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.linear.add_constant(c);
        self
    }

    pub fn add_bilinear(&mut self, coefficient: f64, a: VarId, b: VarId) -> &mut Self {
        self.bilinears.push(BilinearTerm::new(coefficient, a, b));
        self
    }

    pub fn add_expr(&mut self, other: &QuadExpr) -> &mut Self {
        self.linear.add_expr(&other.linear);
        self.bilinears.extend_from_slice(&other.bilinears);
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        QuadExpr {
            linear: self.linear.scaled(s),
            bilinears: self
                .bilinears
                .iter()
                .map(|t| BilinearTerm { coefficient: t.coefficient * s, ..*t })
                .collect(),
        }
    }

    pub fn canonicalize(&mut self) {
        self.linear.canonicalize();
        for t in &mut self.bilinears {
            *t = BilinearTerm::new(t.coefficient, t.var_a, t.var_b);
        }
        self.bilinears.sort_by_key(|t| t.pair());
        let mut merged: Vec<BilinearTerm> = Vec::with_capacity(self.bilinears.len());
        for &t in &self.bilinears {
            match merged.last_mut() {
                Some(last) if last.pair() == t.pair() => last.coefficient += t.coefficient,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coefficient != 0.0);
        self.bilinears = merged;
    }

    pub fn canonicalized(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn is_linear(&self) -> bool {
        self.bilinears.is_empty()
    }

    pub fn max_var(&self) -> Option<VarId> {
        let lin = self.linear.max_var();
        let bil = self.bilinears.iter().map(|t| t.var_b).max();
        lin.max(bil)
    }

    /// Linear part first (ascending variable), then bilinear terms in
    /// ascending (var_a, var_b) order.
    pub fn value(&self, point: &[f64]) -> f64 {
        let mut acc = self.linear.value(point);
        for t in &self.bilinears {
            acc += t.coefficient * point[t.var_a] * point[t.var_b];
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub body: QuadExpr,
    pub sense: Sense,
    pub rhs: f64,
    pub label: String,
}

impl Constraint {
    /// Signed residual lhs - rhs. For Le, residual <= 0 means satisfied;
    /// for Ge, residual >= 0; for Eq, residual == 0.
    pub fn residual(&self, point: &[f64]) -> f64 {
        self.body.value(point) - self.rhs
    }

    /// Nonnegative violation derived from the signed residual.
    pub fn violation_of(&self, residual: f64) -> f64 {
        match self.sense {
            Sense::Le => residual.max(0.0),
            Sense::Ge => (-residual).max(0.0),
            Sense::Eq => residual.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QcqpError {
    #[error("lower bound {lower} exceeds upper bound {upper}")]
    BoundOrder { lower: f64, upper: f64 },
    #[error("expression references unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("duplicate constraint label `{0}`")]
    DuplicateLabel(String),
    #[error("point has {got} values but the model has {want} variables")]
    DimensionMismatch { got: usize, want: usize },
}

pub type ConstraintId = usize;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QcqpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: QuadExpr,
    pub direction: Direction,
}

impl Default for Direction {
    fn default() -> Self {
        Direction::Min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    /// Signed residual per constraint, in constraint order.
    pub residuals: Vec<f64>,
}

impl QcqpModel {
    pub fn new(direction: Direction) -> Self {
        QcqpModel { variables: Vec::new(), constraints: Vec::new(), objective: QuadExpr::new(), direction }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn add_variable(&mut self, lower: f64, upper: f64, kind: VarKind) -> Result<VarId, QcqpError> {
        if lower > upper {
            return Err(QcqpError::BoundOrder { lower, upper });
        }
        let id = self.variables.len();
        // Binary bounds normalize to the unit interval; fixings are a solver
        // (node) concern, not a model one.
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, 1.0),
            VarKind::Continuous => (lower, upper),
        };
        self.variables.push(Variable { id, lower, upper, kind });
        Ok(id)
    }

    fn check_expr(&self, expr: &QuadExpr) -> Result<(), QcqpError> {
        if let Some(v) = expr.max_var() {
            if v >= self.variables.len() {
                return Err(QcqpError::UnknownVariable(v));
            }
        }
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        body: QuadExpr,
        sense: Sense,
        rhs: f64,
        label: impl Into<String>,
    ) -> Result<ConstraintId, QcqpError> {
        let label = label.into();
        self.check_expr(&body)?;
        if self.constraints.iter().any(|c| c.label == label) {
            return Err(QcqpError::DuplicateLabel(label));
        }
        let id = self.constraints.len();
        self.constraints.push(Constraint { body: body.canonicalized(), sense, rhs, label });
        Ok(id)
    }

    pub fn set_objective(&mut self, objective: QuadExpr, direction: Direction) -> Result<(), QcqpError> {
        self.check_expr(&objective)?;
        self.objective = objective.canonicalized();
        self.direction = direction;
        Ok(())
    }

    pub fn constraint_by_label(&self, label: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    /// Objective value and per-constraint signed residuals at a point.
    pub fn evaluate(&self, point: &[f64]) -> Result<Evaluation, QcqpError> {
        if point.len() != self.variables.len() {
            return Err(QcqpError::DimensionMismatch { got: point.len(), want: self.variables.len() });
        }
        Ok(Evaluation {
            objective: self.objective.value(point),
            residuals: self.constraints.iter().map(|c| c.residual(point)).collect(),
        })
    }

    /// Worst constraint violation, each row scaled by 1 + |rhs|.
    pub fn max_scaled_violation(&self, point: &[f64]) -> Result<f64, QcqpError> {
        let eval = self.evaluate(point)?;
        let mut worst: f64 = 0.0;
        for (c, &r) in self.constraints.iter().zip(&eval.residuals) {
            worst = worst.max(c.violation_of(r) / (1.0 + c.rhs.abs()));
        }
        Ok(worst)
    }

    /// Bound violation of a point (box and binary integrality are solver
    /// concerns; this only reports box violations).
    pub fn max_bound_violation(&self, point: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for v in &self.variables {
            let x = point[v.id];
            worst = worst.max(v.lower - x).max(x - v.upper);
        }
        worst
    }

    /// Distinct bilinear variable pairs across constraints and objective,
    /// sorted ascending.
    pub fn bilinear_pairs(&self) -> Vec<(VarId, VarId)> {
        let mut pairs: Vec<(VarId, VarId)> = self
            .constraints
            .iter()
            .flat_map(|c| c.body.bilinears.iter())
            .chain(self.objective.bilinears.iter())
            .map(|t| t.pair())
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_variable_normalizes_binary_and_checks_bounds() {
        let mut m = QcqpModel::new(Direction::Max);
        let b = m.add_variable(0.0, 1.0, VarKind::Binary).unwrap();
        assert_eq!(b, 0);
        assert_eq!((m.variables[b].lower, m.variables[b].upper), (0.0, 1.0));
        let x = m.add_variable(0.0, 200.0, VarKind::Continuous).unwrap();
        assert_eq!((m.variables[x].lower, m.variables[x].upper), (0.0, 200.0));
        assert_eq!(
            m.add_variable(3.0, 2.0, VarKind::Continuous),
            Err(QcqpError::BoundOrder { lower: 3.0, upper: 2.0 })
        );
    }

    #[test]
    fn add_constraint_rejects_unknown_vars_and_duplicate_labels() {
        let mut m = QcqpModel::new(Direction::Min);
        let x = m.add_variable(0.0, 1.0, VarKind::Continuous).unwrap();
        let y = m.add_variable(0.0, 1.0, VarKind::Continuous).unwrap();
        let mut body = QuadExpr::new();
        body.add_linear(1.0, x).add_linear(-1.0, y);
        m.add_constraint(body, Sense::Eq, 0.0, "fb_pool1").unwrap();

        let bad = QuadExpr::from_linear(LinearExpr::term(1.0, 17));
        assert_eq!(m.add_constraint(bad, Sense::Le, 0.0, "r2"), Err(QcqpError::UnknownVariable(17)));

        let dup = QuadExpr::from_linear(LinearExpr::term(1.0, x));
        assert_eq!(
            m.add_constraint(dup, Sense::Le, 1.0, "fb_pool1"),
            Err(QcqpError::DuplicateLabel("fb_pool1".into()))
        );
    }

    #[test]
    fn evaluate_checks_dimensions_and_signs_residuals() {
        let mut m = QcqpModel::new(Direction::Min);
        let x = m.add_variable(0.0, 2.0, VarKind::Continuous).unwrap();
        let y = m.add_variable(0.0, 2.0, VarKind::Continuous).unwrap();
        let mut body = QuadExpr::new();
        body.add_linear(1.0, x).add_bilinear(1.0, x, y);
        m.add_constraint(body, Sense::Le, 1.0, "row").unwrap();
        let mut obj = QuadExpr::new();
        obj.add_bilinear(2.0, y, x);
        m.set_objective(obj, Direction::Min).unwrap();

        assert!(matches!(m.evaluate(&[1.0]), Err(QcqpError::DimensionMismatch { got: 1, want: 2 })));
        let eval = m.evaluate(&[1.0, 1.0]).unwrap();
        assert_eq!(eval.objective, 2.0);
        assert_eq!(eval.residuals, vec![1.0]); // 1 + 1 - 1
        assert_eq!(m.constraints[0].violation_of(eval.residuals[0]), 1.0);
    }

    #[test]
    fn canonicalize_merges_and_orders() {
        let mut e = QuadExpr::new();
        e.add_linear(1.0, 3).add_linear(2.0, 1).add_linear(-1.0, 3);
        e.add_bilinear(1.0, 5, 2).add_bilinear(2.0, 2, 5).add_bilinear(-3.0, 2, 5);
        e.add_constant(4.0);
        e.canonicalize();
        assert_eq!(e.linear.terms, vec![(2.0, 1)]);
        assert!(e.bilinears.is_empty());
        assert_eq!(e.linear.constant, 4.0);
    }
}
