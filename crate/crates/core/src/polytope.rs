//! Polytope-level analysis of LP decoding: pseudoweights, the fundamental
//! cone, the all-zero success predicate, and a heuristic search for the
//! minimum pseudoweight.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::LlrVector;
use crate::code::LinearCode;
use crate::simplex::{solve, BoxLp, LpModel, RowSense, SolveStatus};

#[derive(Debug, Error, PartialEq)]
pub enum PolytopeError {
    #[error("pseudoweight of the zero vector is undefined")]
    ZeroVector,
    #[error("the fundamental cone contains only the origin")]
    EmptyCone,
}

/// AWGN pseudoweight `|x|_1^2 / |x|_2^2` of a nonnegative, nonzero vector.
/// Equals the Hamming weight on binary inputs and is invariant to positive
/// scaling; the value always lies in `[1, n]`.
pub fn pseudoweight(x: &[f64]) -> Result<f64, PolytopeError> {
    debug_assert!(x.iter().all(|&v| v >= 0.0), "pseudoweight needs x >= 0");
    let l1: f64 = x.iter().sum();
    let l2: f64 = x.iter().map(|v| v * v).sum();
    if l2 == 0.0 {
        return Err(PolytopeError::ZeroVector);
    }
    Ok(l1 * l1 / l2)
}

/// One inequality of the fundamental cone: variable `var` of check `check`
/// bounded by the sum of the other variables in that check's support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeInequality {
    pub check: usize,
    pub var: usize,
}

/// The fundamental cone's inequality system: one inequality per 1-entry of
/// the parity-check matrix, plus nonnegativity.
#[derive(Clone, Debug)]
pub struct ConeModel {
    pub inequalities: Vec<ConeInequality>,
    pub n: usize,
}

pub fn cone_model(code: &LinearCode) -> ConeModel {
    let mut inequalities = Vec::with_capacity(code.parity_check().count_ones());
    for check in 0..code.num_checks() {
        for &var in code.check_support(check) {
            inequalities.push(ConeInequality { check, var });
        }
    }
    ConeModel {
        inequalities,
        n: code.block_len(),
    }
}

/// Test whether `x >= 0` and every cone inequality
/// `x_i <= sum_{i' in N_j \ i} x_i'` holds within `tol`.
pub fn in_fundamental_cone(code: &LinearCode, x: &[f64], tol: f64) -> bool {
    if x.len() != code.block_len() {
        return false;
    }
    if x.iter().any(|&v| v < -tol) {
        return false;
    }
    (0..code.num_checks()).all(|j| {
        let support = code.check_support(j);
        let total: f64 = support.iter().map(|&i| x[i]).sum();
        support.iter().all(|&i| 2.0 * x[i] <= total + tol)
    })
}

/// Rows of the normalized-cone LP: cone inequalities over `[0,1]^n` plus the
/// unit-1-norm section.
fn normalized_cone_rows(code: &LinearCode) -> Vec<(Vec<f64>, RowSense, f64)> {
    let n = code.block_len();
    let mut rows = Vec::new();
    for j in 0..code.num_checks() {
        let support = code.check_support(j);
        for &i in support {
            // x_i - sum_{i' != i} x_i' <= 0.
            let mut coeffs = vec![0.0; n];
            for &i2 in support {
                coeffs[i2] = if i2 == i { 1.0 } else { -1.0 };
            }
            rows.push((coeffs, RowSense::Le, 0.0));
        }
    }
    rows.push((vec![1.0; n], RowSense::Eq, 1.0));
    rows
}

/// Whether the LP decoder would output the all-zero codeword for `llr`:
/// true exactly when no direction of the fundamental cone has negative
/// cost, decided by one LP over the cone's unit-1-norm section.
pub fn decodes_to_zero(code: &LinearCode, llr: &LlrVector) -> bool {
    assert_eq!(llr.len(), code.block_len());
    let n = code.block_len();
    let mut lp = BoxLp::new(llr.as_slice(), &vec![(0.0, 1.0); n]);
    for (coeffs, sense, rhs) in normalized_cone_rows(code) {
        lp.add_row(&coeffs, sense, rhs);
    }
    match lp.solve() {
        SolveStatus::Optimal => lp.objective_value() >= -1e-9,
        // An empty section means the cone is trivial; zero always wins.
        SolveStatus::Infeasible => true,
        status => panic!("cone section LP cannot end {status:?}"),
    }
}

/// Best point found by the heuristic minimum-pseudoweight search, with its
/// pseudoweight.
#[derive(Clone, Debug)]
pub struct PseudoweightSearch {
    pub x: Vec<f64>,
    pub pseudoweight: f64,
    pub restarts: usize,
}

/// Heuristic minimizer of the pseudoweight over the fundamental cone.
///
/// On the unit-1-norm section the pseudoweight is the reciprocal of the
/// squared 2-norm, so minimizing it means maximizing `|x|_2^2` there; the
/// search runs iterated linearizations `max (2 x_t) . x` of that convex
/// objective from random cone vertices and keeps the best fixpoint over all
/// restarts. The reported weight is an upper bound on the true minimum
/// pseudoweight, which is itself at most the code's minimum distance.
pub fn min_pseudoweight_search(
    code: &LinearCode,
    restarts: usize,
    seed: u64,
) -> Result<PseudoweightSearch, PolytopeError> {
    assert!(restarts >= 1);
    let n = code.block_len();
    let rows = normalized_cone_rows(code);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Vec<f64>> = None;
    let mut best_norm = 0.0f64;

    for _ in 0..restarts {
        // A random linear functional lands on some vertex of the section.
        let direction: Vec<f64> = (0..n).map(|_| -(rng.random_range(0.01..1.0))).collect();
        let Some(mut x) = maximize_over_section(&direction, &rows, n) else {
            return Err(PolytopeError::EmptyCone);
        };
        let mut norm = sq_norm(&x);
        for _ in 0..100 {
            let gradient: Vec<f64> = x.iter().map(|&v| -2.0 * v).collect();
            let Some(next) = maximize_over_section(&gradient, &rows, n) else {
                break;
            };
            let next_norm = sq_norm(&next);
            if next_norm <= norm + 1e-12 {
                break;
            }
            x = next;
            norm = next_norm;
        }
        if norm > best_norm {
            best_norm = norm;
            best = Some(x);
        }
    }

    let x = best.ok_or(PolytopeError::EmptyCone)?;
    let w = pseudoweight(&x)?;
    Ok(PseudoweightSearch {
        x,
        pseudoweight: w,
        restarts,
    })
}

/// Minimize `direction . x` over the normalized cone section (the rows are
/// reused across calls); `None` when the section is empty.
fn maximize_over_section(
    direction: &[f64],
    rows: &[(Vec<f64>, RowSense, f64)],
    n: usize,
) -> Option<Vec<f64>> {
    let mut lp = BoxLp::new(direction, &vec![(0.0, 1.0); n]);
    for (coeffs, sense, rhs) in rows {
        lp.add_row(coeffs, *sense, *rhs);
    }
    match lp.solve() {
        SolveStatus::Optimal => Some(lp.x().iter().map(|&v| v.max(0.0)).collect()),
        SolveStatus::Infeasible => None,
        status => panic!("cone section LP cannot end {status:?}"),
    }
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Gaussian tail function `Q(a)`, via the complementary error function.
pub fn q_function(a: f64) -> f64 {
    0.5 * libm::erfc(a / std::f64::consts::SQRT_2)
}

/// Pairwise error probability of a point with pseudoweight `w` against the
/// zero codeword on the AWGN channel: `Q(sqrt(2 r snr w))`.
pub fn pairwise_error_probability(w: f64, rate: f64, snr_b: f64) -> f64 {
    q_function((2.0 * rate * snr_b * w).sqrt())
}

/// Decide `(-llr) in conic({rows with zero right-hand side})` by an LP
/// feasibility problem over the conic multipliers. The generating rows are
/// the weight-one forbidden-set inequalities (the cone inequalities) and the
/// lower bounds `-x_i <= 0`. Equivalent to [`decodes_to_zero`]; exercised as
/// the cross-check of that predicate.
pub fn in_dual_cone_by_generators(code: &LinearCode, llr: &LlrVector) -> bool {
    let n = code.block_len();
    let cone = cone_model(code);
    // Generators: one per cone inequality, plus -e_i per variable.
    let mut generators: Vec<Vec<f64>> = Vec::with_capacity(cone.inequalities.len() + n);
    for ineq in &cone.inequalities {
        let support = code.check_support(ineq.check);
        let mut g = vec![0.0; n];
        for &i in support {
            g[i] = if i == ineq.var { 1.0 } else { -1.0 };
        }
        generators.push(g);
    }
    for i in 0..n {
        let mut g = vec![0.0; n];
        g[i] = -1.0;
        generators.push(g);
    }
    // Feasibility: G^T mu = -llr, mu >= 0.
    let mut model = LpModel::minimize(vec![0.0; generators.len()]);
    for coord in 0..n {
        let coeffs: Vec<f64> = generators.iter().map(|g| g[coord]).collect();
        model.add_row(coeffs, RowSense::Eq, -llr[coord]);
    }
    solve(&model).status == SolveStatus::Optimal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::catalog::{fig35, rep2, spc3};

    #[test]
    fn pseudoweight_on_binary_vectors_is_hamming_weight() {
        let x = [1.0, 1.0, 0.0, 1.0];
        assert_eq!(pseudoweight(&x).unwrap(), 3.0);
        for n in 1..=16usize {
            for bits in 1u32..1 << n.min(8) {
                let x: Vec<f64> = (0..n.min(8)).map(|i| f64::from(bits >> i & 1)).collect();
                let w = bits.count_ones() as f64;
                assert_eq!(pseudoweight(&x).unwrap(), w);
            }
        }
    }

    #[test]
    fn pseudoweight_of_uniform_half_vector() {
        let x = [0.5; 4];
        assert!((pseudoweight(&x).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn pseudoweight_scale_invariance() {
        let x = [0.3, 0.0, 0.9, 0.25, 0.5];
        let base = pseudoweight(&x).unwrap();
        for tau in [0.5, 2.0, 7.0] {
            let scaled: Vec<f64> = x.iter().map(|v| v * tau).collect();
            let w = pseudoweight(&scaled).unwrap();
            assert!(
                (w - base).abs() <= 1e-12 * base,
                "tau {tau}: {w} vs {base}"
            );
        }
    }

    #[test]
    fn pseudoweight_rejects_zero() {
        assert_eq!(pseudoweight(&[0.0; 3]), Err(PolytopeError::ZeroVector));
    }

    #[test]
    fn cone_inequality_count_equals_matrix_ones() {
        for code in [fig35(), rep2(), spc3()] {
            let cm = cone_model(&code);
            assert_eq!(cm.inequalities.len(), code.parity_check().count_ones());
        }
    }

    #[test]
    fn codewords_lie_in_the_cone() {
        let code = fig35();
        for word in code.codewords().unwrap() {
            let x: Vec<f64> = word.iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
            assert!(in_fundamental_cone(&code, &x, 1e-9));
        }
    }

    #[test]
    fn unit_vectors_in_a_support_are_outside_the_cone() {
        let code = fig35();
        for i in 0..7 {
            let mut x = vec![0.0; 7];
            x[i] = 1.0;
            assert!(!in_fundamental_cone(&code, &x, 1e-9), "coordinate {i}");
        }
    }

    #[test]
    fn all_positive_llrs_decode_to_zero() {
        let code = fig35();
        let l = LlrVector::new(vec![0.5, 1.0, 2.0, 0.1, 0.7, 1.1, 3.0]).unwrap();
        assert!(decodes_to_zero(&code, &l));
    }

    #[test]
    fn strong_negative_llrs_on_a_codeword_support_defeat_zero() {
        let code = fig35();
        let word = code
            .codewords()
            .unwrap()
            .into_iter()
            .find(|w| !w.is_zero())
            .unwrap();
        let values: Vec<f64> = (0..7)
            .map(|i| if word.get(i) { -10.0 } else { 1.0 })
            .collect();
        let l = LlrVector::new(values).unwrap();
        assert!(!decodes_to_zero(&code, &l));
    }

    #[test]
    fn spc_minimum_pseudoweight_is_two() {
        let code = spc3();
        let search = min_pseudoweight_search(&code, 20, 7).unwrap();
        assert!(
            (search.pseudoweight - 2.0).abs() < 1e-6,
            "got {}",
            search.pseudoweight
        );
    }

    #[test]
    fn repetition_minimum_pseudoweight_is_two() {
        let code = rep2();
        let search = min_pseudoweight_search(&code, 5, 3).unwrap();
        assert!((search.pseudoweight - 2.0).abs() < 1e-6);
    }

    #[test]
    fn search_respects_the_min_distance_upper_bound() {
        let code = fig35();
        let search = min_pseudoweight_search(&code, 30, 11).unwrap();
        let d_min = code.min_distance_bruteforce().unwrap() as f64;
        assert!(search.pseudoweight <= d_min + 1e-9);
        assert!(search.pseudoweight >= 1.0);
        // The witness lies in the cone with unit 1-norm.
        assert!(in_fundamental_cone(&code, &search.x, 1e-7));
        let l1: f64 = search.x.iter().sum();
        assert!((l1 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn trivial_cone_is_detected() {
        let code =
            LinearCode::from_parity_check(crate::gf2::BitMatrix::identity(3)).unwrap();
        assert!(matches!(
            min_pseudoweight_search(&code, 3, 1),
            Err(PolytopeError::EmptyCone)
        ));
        // Zero still decodes correctly there.
        let l = LlrVector::new(vec![-1.0, 2.0, 0.5]).unwrap();
        assert!(decodes_to_zero(&code, &l));
    }

    #[test]
    fn pairwise_error_is_monotone_in_pseudoweight() {
        let rate = 4.0 / 7.0;
        let snr = 1.5;
        let weights = [1.0, 1.7, 2.0, 3.0, 4.5, 7.0];
        for pair in weights.windows(2) {
            assert!(
                pairwise_error_probability(pair[0], rate, snr)
                    > pairwise_error_probability(pair[1], rate, snr)
            );
        }
    }

    #[test]
    fn q_function_reference_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        // Standard normal tail at 1.0.
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
        assert!(q_function(8.0) < 1e-14);
    }

    #[test]
    fn generator_predicate_agrees_with_lp_predicate() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2718);
        for code in [spc3(), rep2(), fig35()] {
            for _ in 0..50 {
                let values: Vec<f64> = (0..code.block_len())
                    .map(|_| rng.random_range(-1.5..1.5))
                    .collect();
                let l = LlrVector::new(values).unwrap();
                assert_eq!(
                    decodes_to_zero(&code, &l),
                    in_dual_cone_by_generators(&code, &l)
                );
            }
        }
    }
}
