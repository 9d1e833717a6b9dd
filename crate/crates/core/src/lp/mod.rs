//! Bounded-variable primal simplex with an artificial-variable phase 1,
//! Dantzig pricing with a Bland fallback for degeneracy, and a dense LU basis
//! with product-form eta updates refactored every 50 pivots.
//!
//! Instances here have at most a few hundred rows, so dense factors and full
//! pricing are acceptable; correctness and determinism are what matter.

mod lu;

use crate::qcqp::{Direction, LinearExpr, Sense};
use lu::DenseLu;

pub const LP_FEAS_TOL: f64 = 1e-7;
pub const LP_PIVOT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 50;
const BLAND_TRIGGER: usize = 1000;
const DEGEN_STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub num_cols: usize,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub objective: LinearExpr,
    pub direction: Direction,
}

impl LpProblem {
    pub fn new(direction: Direction) -> Self {
        LpProblem {
            num_cols: 0,
            col_lower: Vec::new(),
            col_upper: Vec::new(),
            rows: Vec::new(),
            objective: LinearExpr::new(),
            direction,
        }
    }

    pub fn add_col(&mut self, lower: f64, upper: f64) -> usize {
        let id = self.num_cols;
        self.num_cols += 1;
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        id
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.num_cols));
        self.rows.push(LpRow { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    /// Signed activity minus rhs per row at a point.
    pub fn row_residuals(&self, point: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().map(|&(j, a)| a * point[j]).sum::<f64>() - r.rhs)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LpTolerances {
    pub feas: f64,
    pub opt: f64,
    pub pivot: f64,
}

impl Default for LpTolerances {
    fn default() -> Self {
        LpTolerances { feas: LP_FEAS_TOL, opt: 1e-9, pivot: LP_PIVOT_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbSide {
    Lower,
    Upper,
    Free,
}

/// A basis snapshot in structural+slack column space, usable to warm start.
#[derive(Debug, Clone)]
pub struct LpBasis {
    pub basic: Vec<usize>,
    pub nonbasic: Vec<(usize, NbSide)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub point: Vec<f64>,
    pub objective: f64,
    pub basis: LpBasis,
    pub pivots: usize,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// A row that cannot be satisfied together with the others.
    Infeasible { witness_row: usize },
    /// Improving ray in structural-variable space.
    Unbounded { ray: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(&'static str),
}

pub fn solve_lp(problem: &LpProblem, tol: &LpTolerances) -> Result<LpOutcome, LpError> {
    Simplex::new(problem, tol).solve(None)
}

/// Warm start from a basis; falls back to a cold start when the basis is
/// dimensionally incompatible, singular, or primal infeasible, and retries
/// cold once if the warm path breaks down numerically.
pub fn solve_lp_warm(problem: &LpProblem, basis: &LpBasis, tol: &LpTolerances) -> Result<LpOutcome, LpError> {
    match Simplex::new(problem, tol).solve(Some(basis)) {
        Err(LpError::NumericalBreakdown(_)) => Simplex::new(problem, tol).solve(None),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    FreeZero,
}

struct Eta {
    row: usize,
    col: Vec<f64>,
}

struct Simplex {
    tol: LpTolerances,
    n_struct: usize,
    m: usize,
    ncols: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    state: Vec<VarState>,
    x: Vec<f64>,
    basic: Vec<usize>,
    lu: Option<DenseLu>,
    etas: Vec<Eta>,
    pivots: usize,
    degen_streak: usize,
    bland: bool,
    dual_tol: f64,
    obj_sign: f64,
    obj_constant: f64,
    n_artificial: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded { enter: usize, dir: f64, w: Vec<f64> },
    Pivoted,
}

impl Simplex {
    fn new(prob: &LpProblem, tol: &LpTolerances) -> Self {
        let n = prob.num_cols;
        let m = prob.rows.len();
        let mut lower = prob.col_lower.clone();
        let mut upper = prob.col_upper.clone();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in prob.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        // one slack per row; bounds encode the sense
        for (i, row) in prob.rows.iter().enumerate() {
            let (lo, hi) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
            cols.push(vec![(i, 1.0)]);
        }
        let obj_sign = match prob.direction {
            Direction::Min => 1.0,
            Direction::Max => -1.0,
        };
        let mut cost = vec![0.0; n + m];
        for &(c, v) in &prob.objective.terms {
            cost[v] += obj_sign * c;
        }
        let cost_scale = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        Simplex {
            tol: *tol,
            n_struct: n,
            m,
            ncols: n + m,
            lower,
            upper,
            cost,
            cols,
            rhs: prob.rows.iter().map(|r| r.rhs).collect(),
            state: Vec::new(),
            x: Vec::new(),
            basic: Vec::new(),
            lu: None,
            etas: Vec::new(),
            pivots: 0,
            degen_streak: 0,
            bland: false,
            dual_tol: tol.opt * (1.0 + cost_scale),
            obj_sign,
            obj_constant: prob.objective.constant,
            n_artificial: 0,
        }
    }

    fn nearest_bound_state(&self, j: usize) -> VarState {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if lo.abs() <= hi.abs() {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                }
            }
            (true, false) => VarState::AtLower,
            (false, true) => VarState::AtUpper,
            (false, false) => VarState::FreeZero,
        }
    }

    fn nonbasic_value(&self, j: usize, s: VarState) -> f64 {
        match s {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::FreeZero => 0.0,
            VarState::Basic(_) => unreachable!(),
        }
    }

    fn solve(mut self, warm: Option<&LpBasis>) -> Result<LpOutcome, LpError> {
        if let Some(basis) = warm {
            if self.try_install(basis) {
                return self.phase2();
            }
            self.reset_for_cold();
        }
        if let Some(witness_row) = self.cold_start()? {
            return Ok(LpOutcome::Infeasible { witness_row });
        }
        self.phase2()
    }

    fn reset_for_cold(&mut self) {
        self.state.clear();
        self.x.clear();
        self.basic.clear();
        self.lu = None;
        self.etas.clear();
    }

    fn try_install(&mut self, basis: &LpBasis) -> bool {
        if basis.basic.len() != self.m {
            return false;
        }
        if basis.basic.iter().any(|&j| j >= self.ncols) {
            return false;
        }
        let mut seen = vec![false; self.ncols];
        for &j in &basis.basic {
            if seen[j] {
                return false;
            }
            seen[j] = true;
        }
        self.state = (0..self.ncols).map(|j| self.nearest_bound_state(j)).collect();
        for (s, &(j, side)) in basis.nonbasic.iter().enumerate() {
            let _ = s;
            if j >= self.ncols || seen[j] {
                continue;
            }
            self.state[j] = match side {
                NbSide::Lower if self.lower[j].is_finite() => VarState::AtLower,
                NbSide::Upper if self.upper[j].is_finite() => VarState::AtUpper,
                NbSide::Free => VarState::FreeZero,
                _ => self.nearest_bound_state(j),
            };
        }
        for (i, &j) in basis.basic.iter().enumerate() {
            self.state[j] = VarState::Basic(i);
        }
        self.basic = basis.basic.clone();
        if self.refactorize().is_err() {
            return false;
        }
        self.x = vec![0.0; self.ncols];
        for j in 0..self.ncols {
            if let s @ (VarState::AtLower | VarState::AtUpper | VarState::FreeZero) = self.state[j] {
                self.x[j] = self.nonbasic_value(j, s);
            }
        }
        self.recompute_basic_values();
        let feasible = (0..self.m).all(|i| {
            let j = self.basic[i];
            let v = self.x[j];
            v >= self.lower[j] - self.tol.feas && v <= self.upper[j] + self.tol.feas
        });
        feasible
    }

    /// Build the initial basis and run phase 1. Returns `Some(witness_row)`
    /// when the problem is proven infeasible.
    fn cold_start(&mut self) -> Result<Option<usize>, LpError> {
        // Nonbasic structurals and slacks at the bound nearest zero, then one
        // artificial per row whose slack cannot absorb the residual.
        self.state = (0..self.ncols).map(|j| self.nearest_bound_state(j)).collect();
        self.x = vec![0.0; self.ncols];
        for j in 0..self.ncols {
            self.x[j] = self.nonbasic_value(j, self.state[j]);
        }
        // activity of structural columns only
        let mut activity = vec![0.0; self.m];
        for j in 0..self.n_struct {
            let v = self.x[j];
            if v != 0.0 {
                for &(i, a) in &self.cols[j] {
                    activity[i] += a * v;
                }
            }
        }
        self.basic = vec![usize::MAX; self.m];
        let mut art_of_row: Vec<Option<usize>> = vec![None; self.m];
        for i in 0..self.m {
            let slack = self.n_struct + i;
            let need = self.rhs[i] - activity[i];
            let clamped = need.clamp(self.lower[slack], self.upper[slack]);
            if (need - clamped).abs() <= self.tol.feas {
                self.basic[i] = slack;
                self.state[slack] = VarState::Basic(i);
                self.x[slack] = need;
            } else {
                self.x[slack] = clamped;
                self.state[slack] = if clamped == self.lower[slack] { VarState::AtLower } else { VarState::AtUpper };
                let viol = need - clamped;
                let sign = if viol >= 0.0 { 1.0 } else { -1.0 };
                let art = self.ncols;
                self.ncols += 1;
                self.n_artificial += 1;
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.cols.push(vec![(i, sign)]);
                self.cost.push(0.0);
                self.x.push(viol.abs());
                self.state.push(VarState::Basic(i));
                self.basic[i] = art;
                art_of_row[i] = Some(art);
            }
        }
        self.refactorize().map_err(|_| LpError::NumericalBreakdown("singular start basis"))?;
        if self.n_artificial == 0 {
            return Ok(None);
        }
        // phase 1: minimize the total artificial mass
        let saved_cost = std::mem::take(&mut self.cost);
        self.cost = vec![0.0; self.ncols];
        for j in self.n_struct + self.m..self.ncols {
            self.cost[j] = 1.0;
        }
        let saved_dual_tol = self.dual_tol;
        self.dual_tol = self.tol.opt;
        loop {
            match self.step()? {
                StepOutcome::Optimal => break,
                StepOutcome::Unbounded { .. } => {
                    return Err(LpError::NumericalBreakdown("phase 1 unbounded"));
                }
                StepOutcome::Pivoted => {}
            }
        }
        self.cost = saved_cost;
        self.cost.resize(self.ncols, 0.0);
        self.dual_tol = saved_dual_tol;
        let infeas: f64 = (self.n_struct + self.m..self.ncols).map(|j| self.x[j].max(0.0)).sum();
        let rhs_scale = self.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeas > self.tol.feas * (1.0 + rhs_scale) {
            let witness = (0..self.m)
                .filter(|&i| self.basic[i] >= self.n_struct + self.m)
                .max_by(|&a, &b| self.x[self.basic[a]].total_cmp(&self.x[self.basic[b]]))
                .unwrap_or(0);
            return Ok(Some(witness));
        }
        // pin artificials at zero; pivot basic ones out where possible
        self.drive_out_artificials();
        for j in self.n_struct + self.m..self.ncols {
            self.lower[j] = 0.0;
            self.upper[j] = 0.0;
            if !matches!(self.state[j], VarState::Basic(_)) {
                self.x[j] = 0.0;
                self.state[j] = VarState::AtLower;
            }
        }
        self.recompute_basic_values();
        Ok(None)
    }

    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            let b = self.basic[i];
            if b < self.n_struct + self.m {
                continue;
            }
            // tableau row i over non-artificial nonbasic columns
            let mut e = vec![0.0; self.m];
            e[i] = 1.0;
            self.btran(&mut e);
            let mut replacement: Option<(usize, f64)> = None;
            for j in 0..self.n_struct + self.m {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                let alpha: f64 = self.cols[j].iter().map(|&(r, a)| a * e[r]).sum();
                if alpha.abs() > 1e-7 {
                    replacement = Some((j, alpha));
                    break;
                }
            }
            if let Some((j, _)) = replacement {
                let mut w = self.column_ftran(j);
                if w[i].abs() <= self.tol.pivot {
                    continue;
                }
                // zero-step basis change: the artificial sits at zero
                let old_state = self.state[j];
                let enter_val = self.nonbasic_value(j, old_state);
                self.state[self.basic[i]] = VarState::AtLower;
                self.x[self.basic[i]] = 0.0;
                self.basic[i] = j;
                self.state[j] = VarState::Basic(i);
                self.x[j] = enter_val;
                if self.push_eta(i, &mut w).is_err() {
                    continue;
                }
                self.recompute_basic_values();
            }
        }
    }

    fn phase2(mut self) -> Result<LpOutcome, LpError> {
        loop {
            match self.step()? {
                StepOutcome::Optimal => return Ok(self.extract_optimal()),
                StepOutcome::Unbounded { enter, dir, w } => {
                    return Ok(LpOutcome::Unbounded { ray: self.extract_ray(enter, dir, &w) });
                }
                StepOutcome::Pivoted => {}
            }
        }
    }

    fn refactorize(&mut self) -> Result<(), lu::Singular> {
        let m = self.m;
        let mut dense = vec![0.0; m * m];
        for (i, &j) in self.basic.iter().enumerate() {
            let _ = i;
            for &(r, a) in &self.cols[j] {
                dense[r * m + i] = a;
            }
        }
        let lu = DenseLu::factor(dense, m, 1e-13)?;
        self.lu = Some(lu);
        self.etas.clear();
        Ok(())
    }

    fn ftran(&self, v: &mut Vec<f64>) {
        if let Some(lu) = &self.lu {
            lu.solve(v);
        }
        for eta in &self.etas {
            let t = v[eta.row];
            if t != 0.0 {
                for (i, &c) in eta.col.iter().enumerate() {
                    if i == eta.row {
                        v[i] = c * t;
                    } else if c != 0.0 {
                        v[i] += c * t;
                    }
                }
            } else {
                v[eta.row] = 0.0;
            }
        }
    }

    fn btran(&self, v: &mut Vec<f64>) {
        for eta in self.etas.iter().rev() {
            let dot: f64 = eta.col.iter().zip(v.iter()).map(|(&c, &x)| c * x).sum();
            v[eta.row] = dot;
        }
        if let Some(lu) = &self.lu {
            lu.solve_transposed(v);
        }
    }

    fn column_ftran(&self, j: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.m];
        for &(i, a) in &self.cols[j] {
            w[i] = a;
        }
        self.ftran(&mut w);
        w
    }

    fn push_eta(&mut self, row: usize, w: &mut Vec<f64>) -> Result<(), LpError> {
        let piv = w[row];
        let mut col = std::mem::take(w);
        for (i, c) in col.iter_mut().enumerate() {
            if i == row {
                *c = 1.0 / piv;
            } else {
                *c = -*c / piv;
            }
        }
        self.etas.push(Eta { row, col });
        self.pivots += 1;
        if self.etas.len() >= REFACTOR_EVERY {
            self.refactorize().map_err(|_| {
                if std::env::var_os("POOLEQ_TRACE_LP").is_some() {
                    eprintln!("[lp] singular refactorization at pivot {} (m {})", self.pivots, self.m);
                }
                LpError::NumericalBreakdown("singular basis at refactorization")
            })?;
            self.recompute_basic_values();
        }
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let mut rhs_eff = self.rhs.clone();
        for j in 0..self.ncols {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let v = self.x[j];
            if v != 0.0 {
                for &(i, a) in &self.cols[j] {
                    rhs_eff[i] -= a * v;
                }
            }
        }
        self.ftran(&mut rhs_eff);
        for (i, &j) in self.basic.iter().enumerate() {
            self.x[j] = rhs_eff[i];
        }
    }

    fn reduced_costs(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (i, &j) in self.basic.iter().enumerate() {
            y[i] = self.cost[j];
        }
        self.btran(&mut y);
        let mut d = self.cost.clone();
        for j in 0..self.ncols {
            if matches!(self.state[j], VarState::Basic(_)) {
                d[j] = 0.0;
                continue;
            }
            let mut acc = d[j];
            for &(i, a) in &self.cols[j] {
                acc -= y[i] * a;
            }
            d[j] = acc;
        }
        d
    }

    /// Entering column and its movement direction, or None if optimal.
    fn price(&self, d: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, rate)
        for j in 0..self.ncols {
            if self.lower[j] == self.upper[j] && !matches!(self.state[j], VarState::Basic(_)) {
                continue; // fixed columns never move
            }
            let (eligible, dir) = match self.state[j] {
                VarState::Basic(_) => (false, 0.0),
                VarState::AtLower => (d[j] < -self.dual_tol, 1.0),
                VarState::AtUpper => (d[j] > self.dual_tol, -1.0),
                VarState::FreeZero => (d[j].abs() > self.dual_tol, if d[j] < 0.0 { 1.0 } else { -1.0 }),
            };
            if !eligible {
                continue;
            }
            if self.bland {
                return Some((j, dir));
            }
            let rate = d[j].abs();
            match best {
                Some((_, _, r)) if r >= rate => {}
                _ => best = Some((j, dir, rate)),
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn step(&mut self) -> Result<StepOutcome, LpError> {
        const PIVOT_BUDGET: usize = 2_000_000;
        if self.pivots > PIVOT_BUDGET {
            return Err(LpError::NumericalBreakdown("pivot budget exhausted"));
        }
        if self.pivots > 0 && self.pivots % 100_000 == 0 && std::env::var_os("POOLEQ_TRACE_LP").is_some() {
            eprintln!(
                "[lp] pivots {} m {} n {} bland {} streak {} obj {:.6}",
                self.pivots,
                self.m,
                self.n_struct,
                self.bland,
                self.degen_streak,
                (0..self.ncols).map(|j| self.cost[j] * self.x[j]).sum::<f64>()
            );
        }
        let d = self.reduced_costs();
        let Some((enter, dir)) = self.price(&d) else {
            return Ok(StepOutcome::Optimal);
        };
        let mut w = self.column_ftran(enter);
        // two-pass ratio test: the relaxed pass allows bound crossings by the
        // feasibility tolerance, the second pass picks the largest pivot
        // magnitude among the rows that stay within the relaxed limit; this
        // keeps the basis well conditioned. Bland mode reverts to the exact
        // lowest-index rule for its termination guarantee.
        let own_range = self.upper[enter] - self.lower[enter];
        let ratio_of = |i: usize, relax: f64| -> Option<f64> {
            let delta = dir * w[i];
            if delta.abs() <= self.tol.pivot {
                return None;
            }
            let bj = self.basic[i];
            let t = if delta > 0.0 {
                if self.lower[bj].is_finite() {
                    (self.x[bj] - self.lower[bj] + relax) / delta
                } else {
                    return None;
                }
            } else if self.upper[bj].is_finite() {
                (self.x[bj] - self.upper[bj] - relax) / delta
            } else {
                return None;
            };
            Some(t.max(0.0))
        };
        let mut t_min = if own_range.is_finite() { own_range } else { f64::INFINITY };
        let mut leave: Option<usize> = None; // row index; None with finite t_min = bound flip
        if self.bland {
            for i in 0..self.m {
                let Some(t) = ratio_of(i, 0.0) else { continue };
                let better = match leave {
                    None => t <= t_min,
                    Some(prev) => {
                        t < t_min - 1e-12
                            || (t < t_min + 1e-12 && self.basic[i] < self.basic[prev])
                    }
                };
                if better {
                    t_min = t.min(t_min);
                    leave = Some(i);
                }
            }
        } else {
            let mut t_relaxed = t_min;
            for i in 0..self.m {
                if let Some(t) = ratio_of(i, self.tol.feas) {
                    t_relaxed = t_relaxed.min(t);
                }
            }
            if t_relaxed.is_finite() {
                let mut best_mag = 0.0;
                for i in 0..self.m {
                    let Some(t) = ratio_of(i, 0.0) else { continue };
                    if t <= t_relaxed && w[i].abs() > best_mag {
                        best_mag = w[i].abs();
                        t_min = t;
                        leave = Some(i);
                    }
                }
                if leave.is_none() {
                    // only the entering variable's own bound limits the step
                    t_min = own_range;
                } else if own_range.is_finite() && t_min > own_range {
                    // the chosen row's exact ratio overshoots the entering
                    // variable's own range: flip instead
                    leave = None;
                    t_min = own_range;
                }
            }
        }
        if t_min.is_infinite() {
            return Ok(StepOutcome::Unbounded { enter, dir, w });
        }
        if t_min <= DEGEN_STEP_TOL {
            self.degen_streak += 1;
            if self.degen_streak > BLAND_TRIGGER {
                self.bland = true;
            }
        } else {
            self.degen_streak = 0;
            self.bland = false;
        }
        match leave {
            None => {
                // entering variable runs to its opposite bound
                self.x[enter] += dir * t_min;
                for i in 0..self.m {
                    if w[i] != 0.0 {
                        let bj = self.basic[i];
                        self.x[bj] -= dir * w[i] * t_min;
                    }
                }
                self.state[enter] = match self.state[enter] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    s => s,
                };
                self.pivots += 1;
                Ok(StepOutcome::Pivoted)
            }
            Some(r) => {
                if w[r].abs() <= self.tol.pivot {
                    // stale factors? rebuild once and retry the whole step
                    if !self.etas.is_empty() {
                        self.refactorize().map_err(|_| {
                            LpError::NumericalBreakdown("singular basis at refactorization")
                        })?;
                        self.recompute_basic_values();
                        return self.step();
                    }
                    if std::env::var_os("POOLEQ_TRACE_LP").is_some() {
                        eprintln!("[lp] tiny pivot persists at pivot {} (m {})", self.pivots, self.m);
                    }
                    return Err(LpError::NumericalBreakdown("pivot magnitude below tolerance"));
                }
                let leaving = self.basic[r];
                let delta_leaving = dir * w[r];
                self.x[enter] += dir * t_min;
                for i in 0..self.m {
                    if w[i] != 0.0 {
                        let bj = self.basic[i];
                        self.x[bj] -= dir * w[i] * t_min;
                    }
                }
                self.state[leaving] = if delta_leaving > 0.0 {
                    self.x[leaving] = self.lower[leaving];
                    VarState::AtLower
                } else {
                    self.x[leaving] = self.upper[leaving];
                    VarState::AtUpper
                };
                if leaving >= self.n_struct + self.m {
                    // artificials that leave the basis are done for good
                    self.lower[leaving] = 0.0;
                    self.upper[leaving] = 0.0;
                    self.x[leaving] = 0.0;
                    self.state[leaving] = VarState::AtLower;
                }
                self.basic[r] = enter;
                self.state[enter] = VarState::Basic(r);
                self.push_eta(r, &mut w)?;
                Ok(StepOutcome::Pivoted)
            }
        }
    }

    fn extract_optimal(mut self) -> LpOutcome {
        let mut point = vec![0.0; self.n_struct];
        for j in 0..self.n_struct {
            let v = self.x[j];
            point[j] = v.clamp(self.lower[j], self.upper[j]);
            if !point[j].is_finite() {
                point[j] = 0.0;
            }
        }
        let raw_obj: f64 = (0..self.ncols).map(|j| self.cost[j] * self.x[j]).sum();
        let objective = self.obj_sign * raw_obj + self.obj_constant;
        let nonbasic = (0..self.n_struct + self.m)
            .filter_map(|j| match self.state[j] {
                VarState::AtLower => Some((j, NbSide::Lower)),
                VarState::AtUpper => Some((j, NbSide::Upper)),
                VarState::FreeZero => Some((j, NbSide::Free)),
                VarState::Basic(_) => None,
            })
            .collect();
        // artificial slots (redundant rows) are exported as the row's slack;
        // a warm start with that basis simply falls back to cold if singular
        let basic = self
            .basic
            .iter()
            .enumerate()
            .map(|(i, &j)| if j < self.n_struct + self.m { j } else { self.n_struct + i })
            .collect();
        self.etas.clear();
        LpOutcome::Optimal(LpSolution {
            point,
            objective,
            basis: LpBasis { basic, nonbasic },
            pivots: self.pivots,
        })
    }

    fn extract_ray(&self, enter: usize, dir: f64, w: &[f64]) -> Vec<f64> {
        let mut ray = vec![0.0; self.n_struct];
        if enter < self.n_struct {
            ray[enter] = dir;
        }
        for i in 0..self.m {
            let bj = self.basic[i];
            if bj < self.n_struct && w[i] != 0.0 {
                ray[bj] = -dir * w[i];
            }
        }
        ray
    }
}

#[cfg(test)]
mod tests;
