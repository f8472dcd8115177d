//! Bounded-variable simplex engine over an equality-form model.
//!
//! The engine keeps the basis explicitly and refactors the basis matrix on
//! every iteration; at the problem sizes this crate targets that is cheap
//! and avoids any accumulated update error. Upper bounds are handled through
//! nonbasic bound status and bound flips, never through extra rows.

use super::lu::LuFactors;

pub(crate) const FEAS_TOL: f64 = 1e-9;
pub(crate) const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const DEGENERATE_STREAK_LIMIT: u32 = 20;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum VStat {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic with both bounds infinite; rests at value zero.
    Free,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum EngineStatus {
    Optimal,
    Infeasible { row: usize },
    Unbounded,
    /// Iteration cap hit or the basis went numerically singular.
    Stalled,
}

pub(crate) struct Engine {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Column-major constraint matrix: `cols[j][i]` is the entry of column
    /// `j` in row `i`.
    pub cols: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub basic: Vec<usize>,
    pub vstat: Vec<VStat>,
    /// Values of the basic variables, in basis row order; valid after any
    /// loop has run.
    pub xb: Vec<f64>,
    pub pivots: u64,
    pub pivot_limit: u64,
    /// Unbounded direction in engine column space, set when a primal loop
    /// returns `Unbounded`.
    pub ray: Option<Vec<f64>>,
}

impl Engine {
    pub fn new(
        cost: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        cols: Vec<Vec<f64>>,
        rhs: Vec<f64>,
    ) -> Self {
        let n = cost.len();
        debug_assert_eq!(lower.len(), n);
        debug_assert_eq!(upper.len(), n);
        debug_assert_eq!(cols.len(), n);
        let vstat = (0..n)
            .map(|j| default_nonbasic_status(lower[j], upper[j]))
            .collect();
        Self {
            cost,
            lower,
            upper,
            cols,
            rhs,
            basic: Vec::new(),
            vstat,
            xb: Vec::new(),
            pivots: 0,
            pivot_limit: 200_000,
            ray: None,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.vstat[j] {
            VStat::AtLower => self.lower[j],
            VStat::AtUpper => self.upper[j],
            VStat::Free => 0.0,
            VStat::Basic => unreachable!("basic variable has no bound value"),
        }
    }

    /// Full solution vector in engine column space.
    pub fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.num_cols()];
        for j in 0..self.num_cols() {
            if self.vstat[j] != VStat::Basic {
                x[j] = self.nonbasic_value(j);
            }
        }
        for (r, &j) in self.basic.iter().enumerate() {
            x[j] = self.xb[r];
        }
        x
    }

    pub fn objective(&self) -> f64 {
        let x = self.solution();
        x.iter().zip(&self.cost).map(|(xi, ci)| xi * ci).sum()
    }

    pub(crate) fn factor(&self) -> Option<LuFactors> {
        let m = self.num_rows();
        let mut a = vec![0.0; m * m];
        for (c, &j) in self.basic.iter().enumerate() {
            for r in 0..m {
                a[r * m + c] = self.cols[j][r];
            }
        }
        LuFactors::factor(&a, m).ok()
    }

    pub(crate) fn compute_basic_values(&mut self, lu: &LuFactors) {
        let m = self.num_rows();
        let mut resid = self.rhs.clone();
        for j in 0..self.num_cols() {
            if self.vstat[j] == VStat::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for r in 0..m {
                    resid[r] -= self.cols[j][r] * v;
                }
            }
        }
        self.xb = lu.solve(&resid);
    }

    pub fn duals(&self, lu: &LuFactors) -> Vec<f64> {
        let cb: Vec<f64> = self.basic.iter().map(|&j| self.cost[j]).collect();
        lu.solve_transpose(&cb)
    }

    pub fn reduced_cost(&self, y: &[f64], j: usize) -> f64 {
        let mut d = self.cost[j];
        for (r, &yi) in y.iter().enumerate() {
            d -= yi * self.cols[j][r];
        }
        d
    }

    /// Primal simplex from the current (primal-feasible) basis.
    pub fn primal(&mut self) -> EngineStatus {
        let mut bland = false;
        let mut degenerate_streak: u32 = 0;
        loop {
            self.pivots += 1;
            if self.pivots > self.pivot_limit {
                return EngineStatus::Stalled;
            }
            let Some(lu) = self.factor() else {
                return EngineStatus::Stalled;
            };
            self.compute_basic_values(&lu);
            let y = self.duals(&lu);

            // Pricing: most negative reduced-cost violation under Dantzig,
            // smallest eligible index under Bland.
            let mut entering: Option<(usize, f64)> = None; // (col, direction)
            let mut best_violation = DUAL_TOL;
            for j in 0..self.num_cols() {
                if self.vstat[j] == VStat::Basic || self.lower[j] == self.upper[j] {
                    continue; // basic or fixed variables never enter
                }
                let dir = match self.vstat[j] {
                    VStat::AtLower => 1.0,
                    VStat::AtUpper => -1.0,
                    VStat::Free => 0.0,
                    VStat::Basic => unreachable!(),
                };
                let d = self.reduced_cost(&y, j);
                let (dir, violation) = if dir == 0.0 {
                    (if d < 0.0 { 1.0 } else { -1.0 }, d.abs())
                } else {
                    (dir, -d * dir)
                };
                if violation > best_violation {
                    entering = Some((j, dir));
                    if bland {
                        break;
                    }
                    best_violation = violation;
                }
            }
            let Some((q, dir)) = entering else {
                return EngineStatus::Optimal;
            };

            let w = lu.solve(&self.cols[q]);

            // Ratio test. The entering variable can at most travel to its
            // opposite bound; each basic variable blocks at one of its own.
            let mut t_best = if self.lower[q].is_finite() && self.upper[q].is_finite() {
                self.upper[q] - self.lower[q]
            } else {
                f64::INFINITY
            };
            let mut leaving: Option<(usize, VStat)> = None; // (row, status after leaving)
            for r in 0..self.num_rows() {
                let delta = -dir * w[r];
                let bj = self.basic[r];
                if delta > PIVOT_TOL {
                    if self.upper[bj].is_finite() {
                        let t = ((self.upper[bj] - self.xb[r]) / delta).max(0.0);
                        if t < t_best {
                            t_best = t;
                            leaving = Some((r, VStat::AtUpper));
                        }
                    }
                } else if delta < -PIVOT_TOL && self.lower[bj].is_finite() {
                    let t = ((self.xb[r] - self.lower[bj]) / -delta).max(0.0);
                    if t < t_best {
                        t_best = t;
                        leaving = Some((r, VStat::AtLower));
                    }
                }
            }

            if t_best.is_infinite() {
                let mut ray = vec![0.0; self.num_cols()];
                ray[q] = dir;
                for r in 0..self.num_rows() {
                    ray[self.basic[r]] = -dir * w[r];
                }
                self.ray = Some(ray);
                return EngineStatus::Unbounded;
            }

            if t_best <= FEAS_TOL {
                degenerate_streak += 1;
                if degenerate_streak >= DEGENERATE_STREAK_LIMIT {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
                bland = false;
            }

            match leaving {
                None => {
                    // Bound flip: the entering variable runs to its opposite
                    // bound without a basis change.
                    self.vstat[q] = match self.vstat[q] {
                        VStat::AtLower => VStat::AtUpper,
                        VStat::AtUpper => VStat::AtLower,
                        other => other,
                    };
                }
                Some((r, stat)) => {
                    self.vstat[self.basic[r]] = stat;
                    self.vstat[q] = VStat::Basic;
                    self.basic[r] = q;
                }
            }
        }
    }

    /// Dual simplex from the current (dual-feasible) basis; restores primal
    /// feasibility with a nondecreasing objective.
    pub fn dual(&mut self) -> EngineStatus {
        let mut bland = false;
        let mut degenerate_streak: u32 = 0;
        loop {
            self.pivots += 1;
            if self.pivots > self.pivot_limit {
                return EngineStatus::Stalled;
            }
            let Some(lu) = self.factor() else {
                return EngineStatus::Stalled;
            };
            self.compute_basic_values(&lu);
            let y = self.duals(&lu);

            // Leaving variable: the basic value most out of bounds, or the
            // smallest out-of-bounds variable index once Bland's rule is on.
            let mut leaving: Option<(usize, f64)> = None; // (row, +1 below lower / -1 above upper)
            let mut worst = FEAS_TOL;
            let mut smallest_col = usize::MAX;
            for r in 0..self.num_rows() {
                let bj = self.basic[r];
                let below = self.lower[bj] - self.xb[r];
                let above = self.xb[r] - self.upper[bj];
                let (violation, side) = if below > above { (below, 1.0) } else { (above, -1.0) };
                if violation <= FEAS_TOL {
                    continue;
                }
                if bland {
                    if bj < smallest_col {
                        smallest_col = bj;
                        leaving = Some((r, side));
                    }
                } else if violation > worst {
                    worst = violation;
                    leaving = Some((r, side));
                }
            }
            let Some((r, side)) = leaving else {
                return EngineStatus::Optimal;
            };

            let mut unit = vec![0.0; self.num_rows()];
            unit[r] = 1.0;
            let rho = lu.solve_transpose(&unit);

            // Entering variable: smallest dual ratio among the nonbasic
            // columns whose movement pushes the leaving value back into its
            // bound; ties break on the smallest column index.
            let mut entering: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for j in 0..self.num_cols() {
                if self.vstat[j] == VStat::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let move_dir = match self.vstat[j] {
                    VStat::AtLower => 1.0,
                    VStat::AtUpper => -1.0,
                    VStat::Free => 0.0,
                    VStat::Basic => unreachable!(),
                };
                let alpha: f64 = (0..self.num_rows())
                    .map(|i| rho[i] * self.cols[j][i])
                    .sum();
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                // Moving x_j by +move_dir changes x_B[r] by -alpha*move_dir;
                // `side` is the direction x_B[r] has to move.
                if move_dir != 0.0 && -alpha * move_dir * side <= 0.0 {
                    continue;
                }
                let d = self.reduced_cost(&y, j);
                let ratio = d.abs() / alpha.abs();
                // Strict improvement keeps the smallest eligible index on ties.
                if ratio < best_ratio - DUAL_TOL {
                    best_ratio = ratio;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                return EngineStatus::Infeasible { row: r };
            };

            if best_ratio <= DUAL_TOL {
                degenerate_streak += 1;
                if degenerate_streak >= DEGENERATE_STREAK_LIMIT {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
                bland = false;
            }

            self.vstat[self.basic[r]] = if side > 0.0 {
                VStat::AtLower
            } else {
                VStat::AtUpper
            };
            self.vstat[q] = VStat::Basic;
            self.basic[r] = q;
        }
    }

    /// Full solve: slack basis when one can be read off the singleton
    /// columns, otherwise phase one with artificial variables, then primal.
    pub fn solve_two_phase(&mut self) -> EngineStatus {
        let m = self.num_rows();
        // Reset all statuses to bound defaults.
        for j in 0..self.num_cols() {
            self.vstat[j] = default_nonbasic_status(self.lower[j], self.upper[j]);
        }
        self.basic.clear();
        if m == 0 {
            self.xb.clear();
            return self.primal();
        }

        if self.try_singleton_basis() {
            return self.primal();
        }

        // Phase one: one artificial column per row, signed to make the
        // artificial basis feasible at the current residuals.
        let n_real = self.num_cols();
        let residual = self.current_residual();
        let real_cost = std::mem::replace(&mut self.cost, vec![0.0; n_real]);
        for (r, &res) in residual.iter().enumerate() {
            let mut col = vec![0.0; m];
            col[r] = if res >= 0.0 { 1.0 } else { -1.0 };
            self.cols.push(col);
            self.cost.push(1.0);
            self.lower.push(0.0);
            self.upper.push(f64::INFINITY);
            self.vstat.push(VStat::Basic);
            self.basic.push(n_real + r);
        }

        let phase1 = self.primal();
        let infeasibility = self.objective();
        if phase1 != EngineStatus::Optimal || infeasibility > 1e-7 {
            // Leave the artificial columns in place: removing them would
            // orphan basic artificials. An engine that reports Infeasible or
            // Stalled is only read afterwards, never warm-started.
            for (j, c) in real_cost.iter().enumerate() {
                self.cost[j] = *c;
            }
            return match phase1 {
                EngineStatus::Optimal => {
                    let row = (0..self.num_rows())
                        .find(|&r| self.basic[r] >= n_real && self.xb[r] > 1e-7)
                        .unwrap_or(0);
                    EngineStatus::Infeasible { row }
                }
                other => other,
            };
        }

        // Pivot remaining artificials out of the basis; rows where that is
        // impossible are dependent and get dropped.
        let mut dead_rows = Vec::new();
        if let Some(lu) = self.factor() {
            let mut lu = lu;
            for r in 0..m {
                if self.basic[r] < n_real {
                    continue;
                }
                let mut unit = vec![0.0; self.num_rows()];
                unit[r] = 1.0;
                let rho = lu.solve_transpose(&unit);
                let mut replacement: Option<usize> = None;
                for j in 0..n_real {
                    if self.vstat[j] == VStat::Basic {
                        continue;
                    }
                    let alpha: f64 = (0..self.num_rows())
                        .map(|i| rho[i] * self.cols[j][i])
                        .sum();
                    if alpha.abs() > 1e-7 {
                        replacement = Some(j);
                        break;
                    }
                }
                match replacement {
                    Some(j) => {
                        self.vstat[self.basic[r]] = VStat::AtLower;
                        self.vstat[j] = VStat::Basic;
                        self.basic[r] = j;
                        match self.factor() {
                            Some(f) => lu = f,
                            None => return EngineStatus::Stalled,
                        }
                    }
                    None => dead_rows.push(r),
                }
            }
        } else {
            return EngineStatus::Stalled;
        }

        self.remove_artificials(n_real, &dead_rows);
        self.cost = real_cost;
        self.primal()
    }

    /// Residual `rhs - A x` with every variable at its nonbasic rest value.
    fn current_residual(&self) -> Vec<f64> {
        let m = self.num_rows();
        let mut resid = self.rhs.clone();
        for j in 0..self.num_cols() {
            if self.vstat[j] == VStat::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for r in 0..m {
                    resid[r] -= self.cols[j][r] * v;
                }
            }
        }
        resid
    }

    /// Try to assemble a starting basis from structurally independent
    /// singleton columns (slacks) whose bounds accept the row residuals.
    fn try_singleton_basis(&mut self) -> bool {
        let m = self.num_rows();
        let residual = self.current_residual();
        let mut choice: Vec<Option<usize>> = vec![None; m];
        for j in 0..self.num_cols() {
            let mut nonzero_row = None;
            let mut count = 0;
            for r in 0..m {
                if self.cols[j][r] != 0.0 {
                    nonzero_row = Some(r);
                    count += 1;
                    if count > 1 {
                        break;
                    }
                }
            }
            let (Some(r), 1) = (nonzero_row, count) else {
                continue;
            };
            if choice[r].is_some() {
                continue;
            }
            // The residual already carries the column's rest contribution;
            // basic, it must absorb that back plus the leftover.
            let value = residual[r] / self.cols[j][r] + self.nonbasic_value(j);
            if value >= self.lower[j] - FEAS_TOL && value <= self.upper[j] + FEAS_TOL {
                choice[r] = Some(j);
            }
        }
        if choice.iter().any(|c| c.is_none()) {
            return false;
        }
        self.basic = choice.into_iter().map(|c| c.unwrap()).collect();
        for &j in &self.basic {
            self.vstat[j] = VStat::Basic;
        }
        true
    }

    fn remove_artificials(&mut self, n_real: usize, dead_rows: &[usize]) {
        let mut keep_row = vec![true; self.num_rows()];
        for &r in dead_rows {
            keep_row[r] = false;
        }
        self.cols.truncate(n_real);
        self.cost.truncate(n_real);
        self.lower.truncate(n_real);
        self.upper.truncate(n_real);
        self.vstat.truncate(n_real);
        if dead_rows.is_empty() {
            return;
        }
        for col in &mut self.cols {
            let mut r = 0;
            col.retain(|_| {
                let k = keep_row[r];
                r += 1;
                k
            });
        }
        let mut r = 0;
        self.rhs.retain(|_| {
            let k = keep_row[r];
            r += 1;
            k
        });
        let mut r = 0;
        self.basic.retain(|_| {
            let k = keep_row[r];
            r += 1;
            k
        });
    }

    /// Append a row `coeffs . x (+ slack) = rhs`; the fresh slack variable
    /// becomes basic in the new row, so a dual-feasible basis stays dual
    /// feasible and the engine can re-optimize with [`Engine::dual`].
    pub fn add_row(&mut self, coeffs: &[f64], rhs: f64, slack_lower: f64, slack_upper: f64) {
        debug_assert_eq!(coeffs.len(), self.num_cols());
        let m = self.num_rows();
        for (j, col) in self.cols.iter_mut().enumerate() {
            col.push(coeffs[j]);
        }
        self.rhs.push(rhs);
        let mut slack = vec![0.0; m + 1];
        slack[m] = 1.0;
        self.cols.push(slack);
        self.cost.push(0.0);
        self.lower.push(slack_lower);
        self.upper.push(slack_upper);
        self.vstat.push(VStat::Basic);
        self.basic.push(self.num_cols() - 1);
    }

    /// Change the bounds of a column. A nonbasic column snaps onto a status
    /// consistent with the new bounds; re-optimize with [`Engine::dual`]
    /// afterwards.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        match self.vstat[j] {
            VStat::Basic => {}
            VStat::AtLower if lower.is_finite() => {}
            VStat::AtUpper if upper.is_finite() => {}
            _ => self.vstat[j] = default_nonbasic_status(lower, upper),
        }
    }
}

fn default_nonbasic_status(lower: f64, upper: f64) -> VStat {
    if lower.is_finite() {
        VStat::AtLower
    } else if upper.is_finite() {
        VStat::AtUpper
    } else {
        VStat::Free
    }
}
