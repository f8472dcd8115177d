//! Self-contained dense LP solver: standard-form conversion, primal and
//! dual simplex with variable bounds, and duality witnesses.

mod engine;
mod lu;

use std::collections::BTreeSet;

use thiserror::Error;

pub(crate) use engine::{Engine, EngineStatus, VStat};

/// Feasibility tolerance (absolute) shared by the solver and its callers.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Reduced-cost optimality tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A linear program over variables with individual (possibly infinite)
/// bounds. Rows may mix senses; `standardize` turns everything into
/// equalities over nonnegative-or-boxed variables.
#[derive(Clone, Debug)]
pub struct LpModel {
    pub sense: ObjSense,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<(f64, f64)>,
}

impl LpModel {
    /// Minimization problem with default bounds `x >= 0`.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense: ObjSense::Minimize,
            objective,
            rows: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        let mut m = Self::minimize(objective);
        m.sense = ObjSense::Maximize;
        m
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        assert_eq!(bounds.len(), self.num_vars());
        self.bounds = bounds;
        self
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: RowSense, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars());
        self.rows.push(LpRow { coeffs, sense, rhs });
    }
}

/// Where a standardized column came from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VarOrigin {
    Structural(usize),
    /// Negative part of a split free variable.
    NegativePart(usize),
    Slack(usize),
}

/// Equality-form model: `min c.x  s.t.  A x = b,  l <= x <= u`.
///
/// Columns are laid out deterministically: the structural variables first in
/// their original order, then one negative-part column per split free
/// variable (ascending), then one slack column per inequality row (in row
/// order). Row `i` corresponds to row `i` of the source model.
#[derive(Clone, Debug)]
pub struct StandardForm {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub origin: Vec<VarOrigin>,
    /// True when the source model was a maximization; the stored objective
    /// is already negated to minimize.
    pub negated: bool,
    pub n_structural: usize,
}

impl StandardForm {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Map a standardized point back onto the structural variables,
    /// recombining split positive and negative parts.
    pub fn extract(&self, x_std: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_structural];
        for (col, origin) in self.origin.iter().enumerate() {
            match origin {
                VarOrigin::Structural(j) => x[*j] += x_std[col],
                VarOrigin::NegativePart(j) => x[*j] -= x_std[col],
                VarOrigin::Slack(_) => {}
            }
        }
        x
    }
}

/// Rewrite a model in equality standard form: every inequality row gains a
/// signed slack variable, fully free variables split into positive and
/// negative parts, and maximization flips into minimization.
pub fn standardize(model: &LpModel) -> StandardForm {
    let n = model.num_vars();
    let mut objective: Vec<f64> = match model.sense {
        ObjSense::Minimize => model.objective.clone(),
        ObjSense::Maximize => model.objective.iter().map(|c| -c).collect(),
    };
    let mut lower: Vec<f64> = model.bounds.iter().map(|b| b.0).collect();
    let mut upper: Vec<f64> = model.bounds.iter().map(|b| b.1).collect();
    let mut origin: Vec<VarOrigin> = (0..n).map(VarOrigin::Structural).collect();

    let mut split_of: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        if lower[j] == f64::NEG_INFINITY && upper[j] == f64::INFINITY {
            // x_j = x_j^+ - x_j^-.
            lower[j] = 0.0;
            split_of[j] = Some(origin.len());
            origin.push(VarOrigin::NegativePart(j));
            objective.push(-objective[j]);
            lower.push(0.0);
            upper.push(f64::INFINITY);
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(model.num_rows());
    let mut rhs = Vec::with_capacity(model.num_rows());
    for row in &model.rows {
        let mut coeffs = vec![0.0; origin.len()];
        for j in 0..n {
            coeffs[j] = row.coeffs[j];
            if let Some(neg) = split_of[j] {
                coeffs[neg] = -row.coeffs[j];
            }
        }
        rows.push(coeffs);
        rhs.push(row.rhs);
    }
    for (i, row) in model.rows.iter().enumerate() {
        let (slack_lower, slack_upper) = match row.sense {
            RowSense::Le => (0.0, f64::INFINITY),
            RowSense::Ge => (f64::NEG_INFINITY, 0.0),
            RowSense::Eq => continue,
        };
        let col = origin.len();
        origin.push(VarOrigin::Slack(i));
        objective.push(0.0);
        lower.push(slack_lower);
        upper.push(slack_upper);
        for (r, coeffs) in rows.iter_mut().enumerate() {
            coeffs.push(if r == i { 1.0 } else { 0.0 });
        }
        let _ = col;
    }

    StandardForm {
        objective,
        rows,
        rhs,
        lower,
        upper,
        origin,
        negated: model.sense == ObjSense::Maximize,
        n_structural: n,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The solver hit its pivot cap; treat the result as unusable.
    Stalled,
}

/// A simplex basis over the standardized columns: `basic` lists the basic
/// column of each row; every other column is nonbasic at its lower bound
/// unless listed in `at_upper` (free columns rest at zero).
#[derive(Clone, Debug, Default)]
pub struct Basis {
    pub basic: Vec<usize>,
    pub at_upper: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: SolveStatus,
    /// Structural solution in the source model's variable order.
    pub x: Vec<f64>,
    /// Objective in the source model's sense; infinite for infeasible or
    /// unbounded outcomes following the usual conventions.
    pub objective: f64,
    /// Row duals of the minimization form, one per model row.
    pub row_duals: Vec<f64>,
    /// Reduced costs of the structural columns (minimization form).
    pub reduced_costs: Vec<f64>,
    pub iterations: u64,
    /// Unbounded direction (structural space) when `status == Unbounded`.
    pub ray: Option<Vec<f64>>,
    /// A row whose infeasibility was certified when `status == Infeasible`.
    pub infeasible_row: Option<usize>,
    /// Final basis over standardized columns, when one exists.
    pub basis: Option<Basis>,
}

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("basis is invalid: {0}")]
    InvalidBasis(String),
    #[error("starting basis is not primal feasible (row {row}, value {value})")]
    InfeasibleStart { row: usize, value: f64 },
    #[error("starting basis is not dual feasible (column {col}, reduced cost {reduced_cost})")]
    DualInfeasibleStart { col: usize, reduced_cost: f64 },
    #[error("solution is not optimal")]
    NotOptimal,
    #[error("duality check failed: {0}")]
    WitnessCheckFailed(String),
}

fn engine_from(form: &StandardForm) -> Engine {
    let m = form.num_rows();
    let n = form.num_vars();
    let mut cols = vec![vec![0.0; m]; n];
    for (r, row) in form.rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            cols[j][r] = v;
        }
    }
    Engine::new(
        form.objective.clone(),
        form.lower.clone(),
        form.upper.clone(),
        cols,
        form.rhs.clone(),
    )
}

fn install_basis(engine: &mut Engine, basis: &Basis) -> Result<(), SimplexError> {
    let m = engine.num_rows();
    if basis.basic.len() != m {
        return Err(SimplexError::InvalidBasis(format!(
            "basis has {} columns for {} rows",
            basis.basic.len(),
            m
        )));
    }
    let mut seen = vec![false; engine.num_cols()];
    for &j in &basis.basic {
        if j >= engine.num_cols() || seen[j] {
            return Err(SimplexError::InvalidBasis(
                "basic columns must be distinct and in range".into(),
            ));
        }
        seen[j] = true;
    }
    for j in 0..engine.num_cols() {
        engine.vstat[j] = if seen[j] {
            VStat::Basic
        } else if basis.at_upper.contains(&j) {
            if !engine.upper[j].is_finite() {
                return Err(SimplexError::InvalidBasis(format!(
                    "column {j} marked at-upper but has no finite upper bound"
                )));
            }
            VStat::AtUpper
        } else if engine.lower[j].is_finite() {
            VStat::AtLower
        } else if engine.upper[j].is_finite() {
            VStat::AtUpper
        } else {
            VStat::Free
        };
    }
    engine.basic = basis.basic.clone();
    Ok(())
}

fn snapshot_basis(engine: &Engine) -> Basis {
    Basis {
        basic: engine.basic.clone(),
        at_upper: (0..engine.num_cols())
            .filter(|&j| engine.vstat[j] == VStat::AtUpper)
            .collect(),
    }
}

fn finish(form: &StandardForm, engine: &Engine, status: EngineStatus) -> LpSolution {
    let solve_status = match status {
        EngineStatus::Optimal => SolveStatus::Optimal,
        EngineStatus::Infeasible { .. } => SolveStatus::Infeasible,
        EngineStatus::Unbounded => SolveStatus::Unbounded,
        EngineStatus::Stalled => SolveStatus::Stalled,
    };
    let sign = if form.negated { -1.0 } else { 1.0 };
    let objective = match solve_status {
        SolveStatus::Optimal => sign * engine.objective(),
        SolveStatus::Infeasible => sign * f64::INFINITY,
        SolveStatus::Unbounded => sign * f64::NEG_INFINITY,
        SolveStatus::Stalled => f64::NAN,
    };
    let x_std = engine.solution();
    let x = form.extract(&x_std);

    // Duals and reduced costs from the final factorization when available.
    let (row_duals, reduced_costs) = match engine.factor() {
        Some(lu) => {
            let y = engine.duals(&lu);
            let d: Vec<f64> = (0..form.n_structural)
                .map(|j| engine.reduced_cost(&y, j))
                .collect();
            (y, d)
        }
        None => (
            vec![f64::NAN; form.num_rows()],
            vec![f64::NAN; form.n_structural],
        ),
    };

    let ray = engine
        .ray
        .as_ref()
        .filter(|_| solve_status == SolveStatus::Unbounded)
        .map(|r| {
            // Project the engine-space ray onto the structural variables.
            let mut out = vec![0.0; form.n_structural];
            for (col, origin) in form.origin.iter().enumerate() {
                match origin {
                    VarOrigin::Structural(j) => out[*j] += r[col],
                    VarOrigin::NegativePart(j) => out[*j] -= r[col],
                    VarOrigin::Slack(_) => {}
                }
            }
            out
        });
    let infeasible_row = match status {
        EngineStatus::Infeasible { row } => Some(row),
        _ => None,
    };

    LpSolution {
        status: solve_status,
        x,
        objective,
        row_duals,
        reduced_costs,
        iterations: engine.pivots,
        ray,
        infeasible_row,
        basis: (solve_status == SolveStatus::Optimal).then(|| snapshot_basis(engine)),
    }
}

/// Solve from scratch: find an initial basic feasible solution (slack basis
/// when possible, phase-one artificials otherwise), then run the primal
/// simplex. Outcomes are reported through `LpSolution::status`.
pub fn solve(model: &LpModel) -> LpSolution {
    let form = standardize(model);
    let mut engine = engine_from(&form);
    let status = engine.solve_two_phase();
    finish(&form, &engine, status)
}

/// Primal simplex from a caller-supplied primal-feasible basis.
pub fn primal_simplex(model: &LpModel, start: &Basis) -> Result<LpSolution, SimplexError> {
    let form = standardize(model);
    let mut engine = engine_from(&form);
    install_basis(&mut engine, start)?;
    let lu = engine
        .factor()
        .ok_or_else(|| SimplexError::InvalidBasis("basis matrix is singular".into()))?;
    engine.compute_basic_values(&lu);
    for (r, &j) in engine.basic.iter().enumerate() {
        let v = engine.xb[r];
        if v < engine.lower[j] - FEASIBILITY_TOL || v > engine.upper[j] + FEASIBILITY_TOL {
            return Err(SimplexError::InfeasibleStart { row: r, value: v });
        }
    }
    let status = engine.primal();
    Ok(finish(&form, &engine, status))
}

/// Dual simplex from a caller-supplied dual-feasible basis.
pub fn dual_simplex(model: &LpModel, start: &Basis) -> Result<LpSolution, SimplexError> {
    let form = standardize(model);
    let mut engine = engine_from(&form);
    install_basis(&mut engine, start)?;
    let lu = engine
        .factor()
        .ok_or_else(|| SimplexError::InvalidBasis("basis matrix is singular".into()))?;
    engine.compute_basic_values(&lu);
    let y = engine.duals(&lu);
    for j in 0..engine.num_cols() {
        let d = engine.reduced_cost(&y, j);
        let bad = match engine.vstat[j] {
            VStat::Basic => false,
            VStat::AtLower => d < -OPTIMALITY_TOL && engine.lower[j] != engine.upper[j],
            VStat::AtUpper => d > OPTIMALITY_TOL && engine.lower[j] != engine.upper[j],
            VStat::Free => d.abs() > OPTIMALITY_TOL,
        };
        if bad {
            return Err(SimplexError::DualInfeasibleStart {
                col: j,
                reduced_cost: d,
            });
        }
    }
    let status = engine.dual();
    Ok(finish(&form, &engine, status))
}

/// Extract and verify an optimality witness from a solved model: the row
/// duals `y` satisfy the dual constraints, and the dual objective (rhs terms
/// plus the active-bound terms) matches the primal objective. For a model in
/// pure standard form (`x >= 0`, no finite upper bounds) this is exactly
/// `A^T y <= c` and `b^T y = c^T x`.
pub fn dual_witness(model: &LpModel, solution: &LpSolution) -> Result<Vec<f64>, SimplexError> {
    if solution.status != SolveStatus::Optimal {
        return Err(SimplexError::NotOptimal);
    }
    let form = standardize(model);
    let y = &solution.row_duals;
    let tol = 1e-7 * (1.0 + solution.objective.abs());

    // Reconstruct the standardized point from the structural solution.
    let mut was_split = vec![false; form.n_structural];
    for origin in &form.origin {
        if let VarOrigin::NegativePart(j) = origin {
            was_split[*j] = true;
        }
    }
    let mut x_std = vec![0.0; form.num_vars()];
    for (col, origin) in form.origin.iter().enumerate() {
        match origin {
            VarOrigin::Structural(j) => {
                let v = solution.x[*j];
                x_std[col] = if was_split[*j] { v.max(0.0) } else { v };
            }
            VarOrigin::NegativePart(j) => x_std[col] = (-solution.x[*j]).max(0.0),
            VarOrigin::Slack(i) => {
                let row = &model.rows[*i];
                let ax: f64 = row
                    .coeffs
                    .iter()
                    .zip(&solution.x)
                    .map(|(a, xv)| a * xv)
                    .sum();
                x_std[col] = row.rhs - ax;
            }
        }
    }

    let mut dual_objective: f64 = form.rhs.iter().zip(y).map(|(b, yi)| b * yi).sum();
    for col in 0..form.num_vars() {
        let d = {
            let mut d = form.objective[col];
            for (r, yr) in y.iter().enumerate() {
                d -= yr * form.rows[r][col];
            }
            d
        };
        let at_lower = form.lower[col].is_finite()
            && (x_std[col] - form.lower[col]).abs() <= 1e-6 * (1.0 + form.lower[col].abs());
        let at_upper = form.upper[col].is_finite()
            && (x_std[col] - form.upper[col]).abs() <= 1e-6 * (1.0 + form.upper[col].abs());
        // Dual feasibility with bound multipliers folded in.
        let ok = if at_upper && d <= tol {
            dual_objective += d * form.upper[col];
            true
        } else if at_lower && d >= -tol {
            dual_objective += d * form.lower[col];
            true
        } else {
            d.abs() <= tol
        };
        if !ok {
            return Err(SimplexError::WitnessCheckFailed(format!(
                "column {col} has reduced cost {d} inconsistent with its status"
            )));
        }
    }

    let primal_objective = if form.negated {
        -solution.objective
    } else {
        solution.objective
    };
    if (primal_objective - dual_objective).abs() > tol {
        return Err(SimplexError::WitnessCheckFailed(format!(
            "objective gap {} exceeds tolerance",
            (primal_objective - dual_objective).abs()
        )));
    }
    Ok(y.clone())
}

/// Incremental solver for LPs over box-bounded variables, which is the shape
/// of every decoding relaxation in this crate. Rows are appended as cuts
/// arrive and bounds tighten for branching; the bound assignment by
/// objective sign is always dual feasible, so both the first solve and every
/// re-solve run the dual simplex with a warm basis.
pub(crate) struct BoxLp {
    n: usize,
    engine: Engine,
    slack_cols: Vec<usize>,
    started: bool,
    pub lp_solves: usize,
}

impl BoxLp {
    /// All bounds must be finite (a box); that keeps the sign-of-cost
    /// nonbasic assignment well-defined.
    pub fn new(objective: &[f64], bounds: &[(f64, f64)]) -> Self {
        assert_eq!(objective.len(), bounds.len());
        assert!(
            bounds.iter().all(|(l, u)| l.is_finite() && u.is_finite()),
            "BoxLp requires finite variable bounds"
        );
        let n = objective.len();
        let engine = Engine::new(
            objective.to_vec(),
            bounds.iter().map(|b| b.0).collect(),
            bounds.iter().map(|b| b.1).collect(),
            vec![Vec::new(); n],
            Vec::new(),
        );
        Self {
            n,
            engine,
            slack_cols: Vec::new(),
            started: false,
            lp_solves: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.engine.num_rows()
    }

    pub fn add_row(&mut self, coeffs: &[f64], sense: RowSense, rhs: f64) {
        assert_eq!(coeffs.len(), self.n);
        let mut full = vec![0.0; self.engine.num_cols()];
        full[..self.n].copy_from_slice(coeffs);
        let (slack_lower, slack_upper) = match sense {
            RowSense::Le => (0.0, f64::INFINITY),
            RowSense::Ge => (f64::NEG_INFINITY, 0.0),
            RowSense::Eq => (0.0, 0.0),
        };
        self.engine.add_row(&full, rhs, slack_lower, slack_upper);
        self.slack_cols.push(self.engine.num_cols() - 1);
    }

    pub fn set_var_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        assert!(var < self.n && lower.is_finite() && upper.is_finite());
        self.engine.set_bounds(var, lower, upper);
    }

    /// Put every structural variable at the bound its cost prefers and make
    /// the row slacks basic. This basis is dual feasible by construction.
    fn reset_to_sign_basis(&mut self) {
        for j in 0..self.n {
            self.engine.vstat[j] = if self.engine.cost[j] >= 0.0 {
                VStat::AtLower
            } else {
                VStat::AtUpper
            };
        }
        self.engine.basic.clear();
        for &s in &self.slack_cols {
            self.engine.vstat[s] = VStat::Basic;
            self.engine.basic.push(s);
        }
    }

    pub fn solve(&mut self) -> SolveStatus {
        self.lp_solves += 1;
        if !self.started {
            self.reset_to_sign_basis();
            self.started = true;
        }
        let status = self.engine.dual();
        let status = if status == EngineStatus::Stalled {
            // Cold restart from the sign basis; a second stall is final.
            self.reset_to_sign_basis();
            self.engine.dual()
        } else {
            status
        };
        match status {
            EngineStatus::Optimal => SolveStatus::Optimal,
            EngineStatus::Infeasible { .. } => SolveStatus::Infeasible,
            EngineStatus::Unbounded => SolveStatus::Unbounded,
            EngineStatus::Stalled => SolveStatus::Stalled,
        }
    }

    /// Structural solution, clamped onto the box.
    pub fn x(&self) -> Vec<f64> {
        let full = self.engine.solution();
        (0..self.n)
            .map(|j| full[j].clamp(self.engine.lower[j], self.engine.upper[j]))
            .collect()
    }

    pub fn objective_value(&self) -> f64 {
        let x = self.engine.solution();
        (0..self.n).map(|j| x[j] * self.engine.cost[j]).sum()
    }
}
