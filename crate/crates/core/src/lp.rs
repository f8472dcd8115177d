//! LP decoding on the fundamental polytope: the full inequality description,
//! adaptive decoding by cut separation, and redundant-parity-check cuts.

use std::collections::HashSet;

use thiserror::Error;

use crate::channel::LlrVector;
use crate::code::LinearCode;
use crate::gf2::BitVec;
use crate::simplex::{BoxLp, RowSense, SolveStatus};

/// An entry counts as integral when it lies within this distance of 0 or 1.
pub const INTEGRALITY_TOL: f64 = 1e-5;
/// A cut is added only when violated by more than this amount.
pub const CUT_VIOLATION_TOL: f64 = 1e-7;
/// Row-weight limit for materializing the full inequality description.
pub const FULL_POLYTOPE_ROW_LIMIT: usize = 16;
/// Cap on redundant-parity-check rounds within one decode.
pub const RPC_ROUND_CAP: usize = 50;

#[derive(Debug, Error)]
pub enum LpDecodeError {
    #[error("row {row} has weight {weight}, above the limit {limit} for the full description")]
    RowTooDense {
        row: usize,
        weight: usize,
        limit: usize,
    },
    #[error("point has no fractional entry")]
    NoFractionalEntry,
    #[error("iteration cap reached after {lp_solves} LP solves; suspected numerical stall")]
    IterationCap { lp_solves: usize },
    #[error("LLR vector has length {got}, code block length is {expected}")]
    LlrLength { got: usize, expected: usize },
}

/// Where a forbidden-set inequality came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutSource {
    /// Row of the code's parity-check matrix.
    CheckRow(usize),
    /// A redundant parity check (dual codeword found by the RPC search).
    Redundant,
}

/// The inequality `sum_{i in S} x_i - sum_{i in N\S} x_i <= |S| - 1` for an
/// odd-sized `S` inside the support `N` of a (possibly redundant) parity
/// check. Every codeword satisfies it.
#[derive(Clone, Debug)]
pub struct ForbiddenSetCut {
    pub source: CutSource,
    /// Support N of the generating parity check, ascending.
    pub support: Vec<usize>,
    /// The forbidden odd-sized subset S, ascending.
    pub odd_set: Vec<usize>,
}

impl ForbiddenSetCut {
    /// Dense row coefficients and right-hand side of the `<=` inequality.
    pub fn coefficients(&self, n: usize) -> (Vec<f64>, f64) {
        let mut coeffs = vec![0.0; n];
        for &i in &self.support {
            coeffs[i] = -1.0;
        }
        for &i in &self.odd_set {
            coeffs[i] = 1.0;
        }
        (coeffs, self.odd_set.len() as f64 - 1.0)
    }

    /// Amount by which `x` violates the inequality; positive means violated.
    /// Equals one minus the separation form
    /// `sum_{i in S} (1 - x_i) + sum_{i in N\S} x_i`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        1.0 - separation_lhs(&self.support, &self.odd_set, x)
    }

    pub fn satisfied_by_bits(&self, word: &BitVec) -> bool {
        let x: Vec<f64> = word.iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
        self.violation(&x) <= 0.0
    }

    fn key(&self) -> (Vec<usize>, Vec<usize>) {
        (self.support.clone(), self.odd_set.clone())
    }
}

fn separation_lhs(support: &[usize], odd_set: &[usize], x: &[f64]) -> f64 {
    let mut in_s = vec![false; x.len()];
    for &i in odd_set {
        in_s[i] = true;
    }
    support
        .iter()
        .map(|&i| if in_s[i] { 1.0 - x[i] } else { x[i] })
        .sum()
}

/// The odd subset of `support` minimizing the separation left-hand side,
/// together with that minimum. Take every index above one half; when the
/// count is even, toggle the index closest to one half (lowest index on
/// ties).
fn best_odd_set(support: &[usize], x: &[f64]) -> (Vec<usize>, f64) {
    let mut set: Vec<usize> = support.iter().copied().filter(|&i| x[i] > 0.5).collect();
    let mut lhs: f64 = support
        .iter()
        .map(|&i| if x[i] > 0.5 { 1.0 - x[i] } else { x[i] })
        .sum();
    if set.len() % 2 == 0 {
        let toggle = support
            .iter()
            .copied()
            .min_by(|&a, &b| (x[a] - 0.5).abs().total_cmp(&(x[b] - 0.5).abs()))
            .expect("parity-check support is nonempty");
        lhs += 2.0 * (x[toggle] - 0.5).abs();
        if let Some(pos) = set.iter().position(|&i| i == toggle) {
            set.remove(pos);
        } else {
            set.push(toggle);
            set.sort_unstable();
        }
    }
    (set, lhs)
}

/// Separation oracle for one parity-check row: the most violated
/// forbidden-set inequality of that row, if any inequality is violated by
/// more than [`CUT_VIOLATION_TOL`]. At most one cut per row exists.
pub fn separate_row(code: &LinearCode, row: usize, x: &[f64]) -> Option<ForbiddenSetCut> {
    separate_support(code.check_support(row), x, CutSource::CheckRow(row))
}

fn separate_support(support: &[usize], x: &[f64], source: CutSource) -> Option<ForbiddenSetCut> {
    if support.is_empty() {
        return None;
    }
    let (odd_set, lhs) = best_odd_set(support, x);
    (lhs < 1.0 - CUT_VIOLATION_TOL).then(|| ForbiddenSetCut {
        source,
        support: support.to_vec(),
        odd_set,
    })
}

/// All forbidden-set inequalities of every row: one cut per odd-sized subset
/// of each row support. The count is exponential in the row weight, hence
/// the [`FULL_POLYTOPE_ROW_LIMIT`] guard.
pub fn full_polytope_inequalities(
    code: &LinearCode,
) -> Result<Vec<ForbiddenSetCut>, LpDecodeError> {
    let mut cuts = Vec::new();
    for row in 0..code.num_checks() {
        let support = code.check_support(row);
        let w = support.len();
        if w > FULL_POLYTOPE_ROW_LIMIT {
            return Err(LpDecodeError::RowTooDense {
                row,
                weight: w,
                limit: FULL_POLYTOPE_ROW_LIMIT,
            });
        }
        for mask in 0u32..1 << w {
            if mask.count_ones() % 2 == 1 {
                let odd_set: Vec<usize> = (0..w)
                    .filter(|&b| mask >> b & 1 == 1)
                    .map(|b| support[b])
                    .collect();
                cuts.push(ForbiddenSetCut {
                    source: CutSource::CheckRow(row),
                    support: support.to_vec(),
                    odd_set,
                });
            }
        }
    }
    Ok(cuts)
}

/// Membership test for the fundamental polytope: box bounds plus, per row,
/// the minimum separation value staying at or above one.
pub fn in_fundamental_polytope(code: &LinearCode, x: &[f64], tol: f64) -> bool {
    if x.len() != code.block_len() {
        return false;
    }
    if x.iter().any(|&v| v < -tol || v > 1.0 + tol) {
        return false;
    }
    (0..code.num_checks()).all(|row| {
        let (_, lhs) = best_odd_set(code.check_support(row), x);
        lhs >= 1.0 - tol
    })
}

/// Search for violated cuts among redundant parity checks: sort the columns
/// by how fractional the point is, diagonalize the leading part of the
/// parity-check matrix in that order, and separate each row of the result.
/// Every returned cut comes from a dual codeword, so it is valid for the
/// whole code.
pub fn rpc_cut_search(
    code: &LinearCode,
    x: &[f64],
) -> Result<Vec<ForbiddenSetCut>, LpDecodeError> {
    let n = code.block_len();
    assert_eq!(x.len(), n);
    if !x.iter().any(|&v| is_fractional(v)) {
        return Err(LpDecodeError::NoFractionalEntry);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        (x[a] - 0.5)
            .abs()
            .total_cmp(&(x[b] - 0.5).abs())
            .then(a.cmp(&b))
    });
    let diag = code
        .parity_check()
        .diagonalize_left(&order)
        .expect("column order is a permutation");
    let mut cuts = Vec::new();
    for row in 0..diag.rows() {
        let support = diag.row_support(row);
        if let Some(cut) = separate_support(&support, x, CutSource::Redundant) {
            cuts.push(cut);
        }
    }
    Ok(cuts)
}

fn is_fractional(v: f64) -> bool {
    v.min(1.0 - v) > INTEGRALITY_TOL
}

/// Outcome of an LP decode.
#[derive(Clone, Debug)]
pub struct DecodeResult {
    /// The optimum over the relaxation, inside the unit hypercube.
    pub x: Vec<f64>,
    /// Objective value of `x` under the channel LLRs.
    pub objective: f64,
    /// Every entry within [`INTEGRALITY_TOL`] of a bit value.
    pub integral: bool,
    /// An integral optimum is provably the ML codeword.
    pub ml_certificate: bool,
    /// Forbidden-set inequalities present in the final model.
    pub cuts_added: usize,
    pub lp_solves: usize,
    /// The rounded word when the optimum is integral.
    pub rounded: Option<BitVec>,
}

#[derive(Clone, Debug)]
pub struct DecodeOptions {
    /// Cap on LP solves per decode; defaults to `100 * n`.
    pub lp_solve_cap: Option<usize>,
    /// Enable the redundant-parity-check search when plain separation dries
    /// up on a fractional point.
    pub rpc: bool,
    pub rpc_round_cap: usize,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            lp_solve_cap: None,
            rpc: false,
            rpc_round_cap: RPC_ROUND_CAP,
        }
    }
}

/// Deduplicating store of forbidden-set cuts, shared across the LP solves of
/// one decode (and across branch-and-bound nodes).
#[derive(Default)]
pub(crate) struct CutPool {
    cuts: Vec<ForbiddenSetCut>,
    keys: HashSet<(Vec<usize>, Vec<usize>)>,
}

impl CutPool {
    pub fn insert(&mut self, cut: ForbiddenSetCut) -> bool {
        if self.keys.insert(cut.key()) {
            self.cuts.push(cut);
            true
        } else {
            false
        }
    }

    pub fn cuts(&self) -> &[ForbiddenSetCut] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }
}

/// A relaxation solve that may be infeasible when variables are fixed.
pub(crate) enum NodeLp {
    Solved(DecodeResult),
    Infeasible,
}

/// Core adaptive loop: minimize the LLR objective over the box, separating
/// violated forbidden-set inequalities (and optionally redundant ones) until
/// none remain. `bounds` carries branch fixings; `extra_rows` carries
/// problem-level side constraints.
pub(crate) fn adaptive_solve(
    code: &LinearCode,
    llr: &[f64],
    bounds: &[(f64, f64)],
    extra_rows: &[(Vec<f64>, RowSense, f64)],
    pool: &mut CutPool,
    options: &DecodeOptions,
) -> Result<NodeLp, LpDecodeError> {
    let n = code.block_len();
    if llr.len() != n {
        return Err(LpDecodeError::LlrLength {
            got: llr.len(),
            expected: n,
        });
    }
    let cap = options.lp_solve_cap.unwrap_or(100 * n);
    let mut lp = BoxLp::new(llr, bounds);
    for (coeffs, sense, rhs) in extra_rows {
        lp.add_row(coeffs, *sense, *rhs);
    }
    for cut in pool.cuts() {
        let (coeffs, rhs) = cut.coefficients(n);
        lp.add_row(&coeffs, RowSense::Le, rhs);
    }

    let mut rpc_rounds = 0;
    loop {
        match lp.solve() {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Ok(NodeLp::Infeasible),
            SolveStatus::Unbounded | SolveStatus::Stalled => {
                return Err(LpDecodeError::IterationCap {
                    lp_solves: lp.lp_solves,
                })
            }
        }
        if lp.lp_solves > cap {
            return Err(LpDecodeError::IterationCap {
                lp_solves: lp.lp_solves,
            });
        }
        let x = lp.x();
        let mut fresh: Vec<ForbiddenSetCut> = Vec::new();
        for row in 0..code.num_checks() {
            if let Some(cut) = separate_row(code, row, &x) {
                if pool.insert(cut.clone()) {
                    fresh.push(cut);
                }
            }
        }
        if fresh.is_empty()
            && options.rpc
            && rpc_rounds < options.rpc_round_cap
            && x.iter().any(|&v| is_fractional(v))
        {
            rpc_rounds += 1;
            for cut in rpc_cut_search(code, &x)? {
                if pool.insert(cut.clone()) {
                    fresh.push(cut);
                }
            }
        }
        if fresh.is_empty() {
            let cuts_added = pool.len();
            if cuts_added > n * n {
                log::warn!(
                    "adaptive model accumulated {cuts_added} inequalities, above the n^2 = {} expectation",
                    n * n
                );
            }
            return Ok(NodeLp::Solved(finish_result(
                x,
                llr,
                cuts_added,
                lp.lp_solves,
            )));
        }
        for cut in &fresh {
            let (coeffs, rhs) = cut.coefficients(n);
            lp.add_row(&coeffs, RowSense::Le, rhs);
        }
    }
}

fn finish_result(x: Vec<f64>, llr: &[f64], cuts_added: usize, lp_solves: usize) -> DecodeResult {
    let objective = x.iter().zip(llr).map(|(xi, li)| xi * li).sum();
    let integral = x.iter().all(|&v| !is_fractional(v));
    let rounded = integral.then(|| {
        BitVec::from_bools(&x.iter().map(|&v| v > 0.5).collect::<Vec<_>>())
    });
    DecodeResult {
        x,
        objective,
        integral,
        ml_certificate: integral,
        cuts_added,
        lp_solves,
        rounded,
    }
}

fn unit_box(n: usize) -> Vec<(f64, f64)> {
    vec![(0.0, 1.0); n]
}

/// Decode over the fully materialized fundamental polytope: every
/// forbidden-set inequality of every row enters the model up front.
pub fn lp_decode(code: &LinearCode, llr: &LlrVector) -> Result<DecodeResult, LpDecodeError> {
    let n = code.block_len();
    if llr.len() != n {
        return Err(LpDecodeError::LlrLength {
            got: llr.len(),
            expected: n,
        });
    }
    let cuts = full_polytope_inequalities(code)?;
    let mut lp = BoxLp::new(llr.as_slice(), &unit_box(n));
    for cut in &cuts {
        let (coeffs, rhs) = cut.coefficients(n);
        lp.add_row(&coeffs, RowSense::Le, rhs);
    }
    match lp.solve() {
        SolveStatus::Optimal => {}
        status => panic!("full polytope LP cannot fail, got {status:?}"),
    }
    let x = lp.x();
    Ok(finish_result(x, llr.as_slice(), cuts.len(), lp.lp_solves))
}

/// Adaptive LP decoding: start from the bare unit hypercube and add violated
/// forbidden-set inequalities until the optimum satisfies them all. The
/// result matches [`lp_decode`] whenever both are runnable.
pub fn adaptive_lp_decode(
    code: &LinearCode,
    llr: &LlrVector,
) -> Result<DecodeResult, LpDecodeError> {
    adaptive_lp_decode_with_options(code, llr, &DecodeOptions::default())
}

/// Adaptive decoding extended by redundant-parity-check cut search whenever
/// plain separation finds nothing on a fractional optimum.
pub fn adaptive_lp_decode_with_rpc(
    code: &LinearCode,
    llr: &LlrVector,
) -> Result<DecodeResult, LpDecodeError> {
    let options = DecodeOptions {
        rpc: true,
        ..DecodeOptions::default()
    };
    adaptive_lp_decode_with_options(code, llr, &options)
}

pub fn adaptive_lp_decode_with_options(
    code: &LinearCode,
    llr: &LlrVector,
    options: &DecodeOptions,
) -> Result<DecodeResult, LpDecodeError> {
    let mut pool = CutPool::default();
    match adaptive_solve(
        code,
        llr.as_slice(),
        &unit_box(code.block_len()),
        &[],
        &mut pool,
        options,
    )? {
        NodeLp::Solved(result) => Ok(result),
        NodeLp::Infeasible => {
            unreachable!("the unit box with valid cuts contains every codeword")
        }
    }
}
