//! Solver-level tests: fixtures with known optima, duality witnesses, and a
//! brute-force vertex-enumeration oracle on small bounded instances.

use mpdecode_core::simplex::{
    dual_simplex, dual_witness, primal_simplex, solve, standardize, Basis, LpModel, RowSense,
    SolveStatus, StandardForm, VarOrigin,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The one-row fixture `(1/2) x1 + x2 = 1, x >= 0`.
fn half_plus_one(c: Vec<f64>) -> LpModel {
    let mut m = LpModel::minimize(c);
    m.add_row(vec![0.5, 1.0], RowSense::Eq, 1.0);
    m
}

#[test]
fn fixture_bfs_for_basis_zero_is_two_zero() {
    // With a zero objective the primal simplex accepts the starting vertex,
    // so the returned point is exactly the BFS of the given basis.
    let model = half_plus_one(vec![0.0, 0.0]);
    let basis = Basis {
        basic: vec![0],
        at_upper: Default::default(),
    };
    let sol = primal_simplex(&model, &basis).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_eq!(sol.x, vec![2.0, 0.0]);
}

#[test]
fn fixture_optimum_moves_to_other_vertex() {
    // min x1 over the segment from (2,0) to (0,1).
    let sol = solve(&half_plus_one(vec![1.0, 0.0]));
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.x[0]).abs() < 1e-12);
    assert!((sol.x[1] - 1.0).abs() < 1e-12);
    assert!(sol.objective.abs() < 1e-12);
}

#[test]
fn zero_objective_is_optimal_anywhere_feasible() {
    let sol = solve(&half_plus_one(vec![0.0, 0.0]));
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_eq!(sol.objective, 0.0);
}

#[test]
fn unbounded_with_certifying_ray() {
    let mut model = LpModel::minimize(vec![-1.0, 0.0]);
    model.add_row(vec![1.0, -1.0], RowSense::Eq, 0.0);
    let sol = solve(&model);
    assert_eq!(sol.status, SolveStatus::Unbounded);
    assert_eq!(sol.objective, f64::NEG_INFINITY);
    let ray = sol.ray.expect("unbounded outcome must carry a ray");
    // The ray keeps Ax = 0 and decreases the objective.
    assert!((ray[0] - ray[1]).abs() < 1e-9);
    assert!(ray[0] > 0.0);
}

#[test]
fn infeasible_system_detected() {
    let mut model = LpModel::minimize(vec![1.0]);
    model.add_row(vec![1.0], RowSense::Le, -1.0);
    let sol = solve(&model);
    assert_eq!(sol.status, SolveStatus::Infeasible);
    assert_eq!(sol.objective, f64::INFINITY);
    assert!(sol.infeasible_row.is_some());
}

#[test]
fn hypercube_optimum_is_separable() {
    let c = vec![0.3, -1.2, 0.0, -0.4, 2.0];
    let model = LpModel::minimize(c.clone()).with_bounds(vec![(0.0, 1.0); 5]);
    let sol = solve(&model);
    assert_eq!(sol.status, SolveStatus::Optimal);
    for (j, &cj) in c.iter().enumerate() {
        let want = if cj < 0.0 { 1.0 } else { 0.0 };
        assert_eq!(sol.x[j], want, "coordinate {j}");
    }
}

#[test]
fn maximization_negates_the_optimum() {
    let model = LpModel::maximize(vec![1.0, 1.0]).with_bounds(vec![(0.0, 1.0); 2]);
    let sol = solve(&model);
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective - 2.0).abs() < 1e-12);
}

#[test]
fn standardize_adds_slack_and_splits_free_variables() {
    let mut model = LpModel::minimize(vec![1.0, 2.0]);
    model.set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
    model.add_row(vec![1.0, 1.0], RowSense::Le, 3.0);
    let form = standardize(&model);
    // Columns: x0, x1 (positive part), x1 negative part, slack of row 0.
    assert_eq!(form.num_vars(), 4);
    assert_eq!(form.origin[2], VarOrigin::NegativePart(1));
    assert_eq!(form.origin[3], VarOrigin::Slack(0));
    assert_eq!(form.objective, vec![1.0, 2.0, -2.0, 0.0]);
    assert_eq!(form.rows[0], vec![1.0, 1.0, -1.0, 1.0]);
    // An already-standard model passes through with identity structure.
    let mut std_model = LpModel::minimize(vec![1.0]);
    std_model.add_row(vec![1.0], RowSense::Eq, 1.0);
    let plain = standardize(&std_model);
    assert_eq!(plain.num_vars(), 1);
    assert_eq!(plain.origin[0], VarOrigin::Structural(0));
}

#[test]
fn free_variable_split_reaches_negative_optimum() {
    let mut model = LpModel::minimize(vec![1.0]);
    model.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
    model.add_row(vec![1.0], RowSense::Ge, -5.0);
    let sol = solve(&model);
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.x[0] + 5.0).abs() < 1e-9);
}

#[test]
fn dual_simplex_from_optimal_basis_returns_immediately() {
    let model = half_plus_one(vec![1.0, 0.0]);
    let cold = solve(&model);
    let basis = cold.basis.clone().unwrap();
    let warm = dual_simplex(&model, &basis).unwrap();
    assert_eq!(warm.status, SolveStatus::Optimal);
    assert!((warm.objective - cold.objective).abs() < 1e-12);
    // One factorization proves optimality; no basis exchange happens.
    assert!(warm.iterations <= 1);
}

#[test]
fn dual_simplex_reoptimizes_after_one_violated_cut() {
    // Start: min -x1 - x2 over the unit box; optimum (1,1).
    let mut model = LpModel::minimize(vec![-1.0, -1.0]).with_bounds(vec![(0.0, 1.0); 2]);
    let first = solve(&model);
    assert_eq!(first.x, vec![1.0, 1.0]);
    // Cut off the corner and warm-start from the previous basis.
    model.add_row(vec![1.0, 1.0], RowSense::Le, 1.5);
    let mut basis = first.basis.clone().unwrap();
    // The appended row brings one appended slack column; it starts basic.
    basis.basic.push(standardize(&model).num_vars() - 1);
    let warm = dual_simplex(&model, &basis).unwrap();
    let cold = solve(&model);
    assert_eq!(warm.status, SolveStatus::Optimal);
    assert_eq!(cold.status, SolveStatus::Optimal);
    assert!((warm.objective - cold.objective).abs() < 1e-9);
    assert!((warm.objective + 1.5).abs() < 1e-9);
}

#[test]
fn primal_simplex_rejects_infeasible_start() {
    let model = half_plus_one(vec![0.0, 0.0]);
    // Basis {x2} forces x2 = 1 which is feasible; basis {x1} with x1 at a
    // negative value cannot happen here, so build an infeasible start from a
    // bounded model instead.
    let mut bad = LpModel::minimize(vec![0.0, 0.0]);
    bad.set_bounds(0, 0.0, 1.0);
    bad.add_row(vec![1.0, 0.0], RowSense::Eq, 5.0);
    let basis = Basis {
        basic: vec![0],
        at_upper: Default::default(),
    };
    assert!(primal_simplex(&bad, &basis).is_err());
    // Sanity: the fixture model accepts its legal basis.
    assert!(primal_simplex(
        &model,
        &Basis {
            basic: vec![1],
            at_upper: Default::default()
        }
    )
    .is_ok());
}

#[test]
fn dual_simplex_rejects_dual_infeasible_start() {
    // min -x1 with slack basis: reduced cost of x1 is -1 < 0 at lower bound.
    let mut model = LpModel::minimize(vec![-1.0]);
    model.add_row(vec![1.0], RowSense::Le, 4.0);
    let basis = Basis {
        basic: vec![1],
        at_upper: Default::default(),
    };
    assert!(dual_simplex(&model, &basis).is_err());
}

#[test]
fn witness_certifies_zero_objective_trivially() {
    let model = half_plus_one(vec![0.0, 0.0]);
    let sol = solve(&model);
    let y = dual_witness(&model, &sol).unwrap();
    assert_eq!(y.len(), 1);
    assert!(y[0].abs() < 1e-9);
}

#[test]
fn witness_rejected_for_non_optimal_solutions() {
    let mut model = LpModel::minimize(vec![1.0]);
    model.add_row(vec![1.0], RowSense::Le, -1.0);
    let sol = solve(&model);
    assert!(dual_witness(&model, &sol).is_err());
}

// ---------------------------------------------------------------------------
// Brute-force oracle: enumerate all candidate bases of the standardized form
// and take the best feasible basic solution.
// ---------------------------------------------------------------------------

fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

/// Minimum objective over all vertices of the standardized feasible region,
/// enumerating every basis candidate and every finite bound assignment of
/// the nonbasic columns.
fn vertex_enumeration_min(form: &StandardForm) -> Option<f64> {
    let n = form.num_vars();
    let m = form.num_rows();
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        // Bound assignments for nonbasic columns; columns with one finite
        // bound have no choice.
        let nonbasic: Vec<usize> = (0..n).filter(|j| !subset.contains(j)).collect();
        let choices: Vec<Vec<f64>> = nonbasic
            .iter()
            .map(|&j| {
                let mut c = Vec::new();
                if form.lower[j].is_finite() {
                    c.push(form.lower[j]);
                }
                if form.upper[j].is_finite() && form.upper[j] != form.lower[j] {
                    c.push(form.upper[j]);
                }
                if c.is_empty() {
                    c.push(0.0);
                }
                c
            })
            .collect();
        let mut assignment = vec![0usize; nonbasic.len()];
        'assignments: loop {
            let mut rhs = form.rhs.clone();
            for (idx, &j) in nonbasic.iter().enumerate() {
                let v = choices[idx][assignment[idx]];
                for r in 0..m {
                    rhs[r] -= form.rows[r][j] * v;
                }
            }
            let cols: Vec<Vec<f64>> = (0..m)
                .map(|r| subset.iter().map(|&j| form.rows[r][j]).collect())
                .collect();
            if let Some(xb) = dense_solve(&cols, &rhs) {
                let feasible = subset
                    .iter()
                    .zip(&xb)
                    .all(|(&j, &v)| v >= form.lower[j] - 1e-7 && v <= form.upper[j] + 1e-7);
                if feasible {
                    let mut obj = 0.0;
                    for (idx, &j) in nonbasic.iter().enumerate() {
                        obj += form.objective[j] * choices[idx][assignment[idx]];
                    }
                    for (&j, &v) in subset.iter().zip(&xb) {
                        obj += form.objective[j] * v;
                    }
                    best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
            // Advance the mixed-radix assignment counter.
            for idx in 0..nonbasic.len() {
                assignment[idx] += 1;
                if assignment[idx] < choices[idx].len() {
                    continue 'assignments;
                }
                assignment[idx] = 0;
            }
            break;
        }
        // Advance the subset (lexicographic combinations).
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < n - (m - i) {
                subset[i] += 1;
                for k in i + 1..m {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_box_model(rng: &mut ChaCha8Rng) -> LpModel {
    let n = rng.random_range(2..5usize);
    let m = rng.random_range(1..3usize);
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut model = LpModel::minimize(c).with_bounds(vec![(0.0, 1.0); n]);
    // Feasible by construction: rows evaluated at an interior point.
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.8)).collect();
    for _ in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ax: f64 = coeffs.iter().zip(&x0).map(|(a, x)| a * x).sum();
        let sense = match rng.random_range(0..3) {
            0 => RowSense::Le,
            1 => RowSense::Ge,
            _ => RowSense::Eq,
        };
        let rhs = match sense {
            RowSense::Le => ax + rng.random_range(0.0..0.5),
            RowSense::Ge => ax - rng.random_range(0.0..0.5),
            RowSense::Eq => ax,
        };
        model.add_row(coeffs, sense, rhs);
    }
    model
}

#[test]
fn solver_matches_vertex_enumeration_on_random_box_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let model = random_box_model(&mut rng);
        let sol = solve(&model);
        assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}");
        let oracle = vertex_enumeration_min(&standardize(&model))
            .expect("feasible model must have a vertex");
        assert!(
            (sol.objective - oracle).abs() < 1e-6,
            "trial {trial}: solver {} vs oracle {}",
            sol.objective,
            oracle
        );
    }
}

#[test]
fn strong_duality_holds_on_random_standard_form_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..200 {
        let n = rng.random_range(2..8usize);
        let m = rng.random_range(1..5usize);
        // Nonnegative costs keep min c.x over x >= 0 bounded.
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let mut model = LpModel::minimize(c);
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        for _ in 0..m {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let ax: f64 = coeffs.iter().zip(&x0).map(|(a, x)| a * x).sum();
            let sense = match rng.random_range(0..3) {
                0 => RowSense::Le,
                1 => RowSense::Ge,
                _ => RowSense::Eq,
            };
            let rhs = match sense {
                RowSense::Le => ax + rng.random_range(0.0..1.0),
                RowSense::Ge => ax - rng.random_range(0.0..1.0),
                RowSense::Eq => ax,
            };
            model.add_row(coeffs, sense, rhs);
        }
        let sol = solve(&model);
        assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}");
        let y = dual_witness(&model, &sol)
            .unwrap_or_else(|e| panic!("trial {trial}: witness rejected: {e}"));
        // Plain strong duality for standard-form models.
        let by: f64 = model.rows.iter().zip(&y).map(|(r, yi)| r.rhs * yi).sum();
        assert!(
            (sol.objective - by).abs() <= 1e-7 * (1.0 + sol.objective.abs()),
            "trial {trial}: gap {}",
            (sol.objective - by).abs()
        );
    }
}
