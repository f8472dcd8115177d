//! Exact ML decoding by LP-based branch-and-bound, the parity feasibility
//! view of codeword membership, and minimum-distance computation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::channel::LlrVector;
use crate::code::{CodeError, LinearCode};
use crate::gf2::BitVec;
use crate::lp::{adaptive_solve, CutPool, DecodeOptions, LpDecodeError, NodeLp, INTEGRALITY_TOL};
use crate::simplex::RowSense;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("node budget of {budget} exhausted; instance too hard at this scale")]
    NodeBudgetExceeded { budget: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Decode(#[from] LpDecodeError),
    #[error("code has no nonzero codewords")]
    NoNonzeroCodewords,
}

#[derive(Clone, Debug)]
pub struct BnbOptions {
    pub node_budget: usize,
    /// Seed the incumbent with the hard-decision word when it happens to be
    /// a codeword.
    pub hard_decision_start: bool,
    /// Explore children even when their bound cannot beat the incumbent;
    /// only used to validate pruning in tests.
    pub disable_pruning: bool,
    /// Enable redundant-parity-check cuts inside node relaxations.
    pub rpc_in_nodes: bool,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            node_budget: 100_000,
            hard_decision_start: false,
            disable_pruning: false,
            rpc_in_nodes: false,
        }
    }
}

/// Result of a branch-and-bound decode.
#[derive(Clone, Debug)]
pub struct BnbOutcome {
    pub codeword: BitVec,
    pub objective: f64,
    pub nodes_explored: usize,
    pub lp_solves: usize,
    /// Forbidden-set cuts accumulated in the shared pool.
    pub cuts_in_pool: usize,
}

/// Exhaustive minimum of the LLR objective over all codewords; the
/// reference oracle for every decoder in the crate.
pub fn brute_force_ml(code: &LinearCode, llr: &LlrVector) -> Result<(BitVec, f64), MlError> {
    assert_eq!(llr.len(), code.block_len());
    let words = code.codewords()?;
    let best = words
        .into_iter()
        .map(|w| {
            let obj = llr.objective_of(&w);
            (w, obj)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("a code has at least the zero codeword");
    Ok(best)
}

/// Real-arithmetic parity view of membership: `x` is a codeword exactly when
/// every entry of `H x`, computed over the integers, is even.
pub fn ip_parity_feasible(code: &LinearCode, x: &BitVec) -> bool {
    if x.len() != code.block_len() {
        return false;
    }
    (0..code.num_checks()).all(|j| {
        let ones = code
            .check_support(j)
            .iter()
            .filter(|&&i| x.get(i))
            .count();
        ones % 2 == 0
    })
}

struct Node {
    bound: f64,
    fixings: Vec<(usize, bool)>,
    depth: usize,
    /// Fractional point of the node relaxation, for branching.
    x: Vec<f64>,
}

/// Heap ordering by bound (best-first); ties resolve to the shallower node
/// and then to the older fixing pattern for determinism.
struct Ranked(Node, usize);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .bound
            .total_cmp(&other.0.bound)
            .then(self.0.depth.cmp(&other.0.depth))
            .then(self.1.cmp(&other.1))
    }
}

fn box_with_fixings(n: usize, fixings: &[(usize, bool)]) -> Vec<(f64, f64)> {
    let mut bounds = vec![(0.0, 1.0); n];
    for &(var, bit) in fixings {
        let v = if bit { 1.0 } else { 0.0 };
        bounds[var] = (v, v);
    }
    bounds
}

/// Maximum-likelihood decoding as a binary integer program over the
/// fundamental polytope, solved by best-bound branch-and-bound. Node
/// relaxations run the adaptive LP decoder with branch fixings installed as
/// variable bounds; forbidden-set cuts are pooled across the whole tree.
pub fn ml_decode_bnb(code: &LinearCode, llr: &LlrVector) -> Result<BnbOutcome, MlError> {
    ml_decode_bnb_with_options(code, llr, &BnbOptions::default())
}

pub fn ml_decode_bnb_with_options(
    code: &LinearCode,
    llr: &LlrVector,
    options: &BnbOptions,
) -> Result<BnbOutcome, MlError> {
    branch_and_bound(code, llr.as_slice(), &[], options)
}

/// Shared search core; `extra_rows` lets the minimum-distance computation
/// add its zero-excluding constraint to every node.
fn branch_and_bound(
    code: &LinearCode,
    llr: &[f64],
    extra_rows: &[(Vec<f64>, RowSense, f64)],
    options: &BnbOptions,
) -> Result<BnbOutcome, MlError> {
    let n = code.block_len();
    let mut pool = CutPool::default();
    let decode_options = DecodeOptions {
        rpc: options.rpc_in_nodes,
        ..DecodeOptions::default()
    };

    let mut incumbent: Option<(BitVec, f64)> = None;
    if options.hard_decision_start {
        let hard = BitVec::from_bools(&llr.iter().map(|&l| l < 0.0).collect::<Vec<_>>());
        if code.is_codeword(&hard) && satisfies_extra_rows(&hard, extra_rows) {
            let obj = objective_of(llr, &hard);
            incumbent = Some((hard, obj));
        }
    }

    let mut nodes_explored = 0usize;
    let mut lp_solves = 0usize;
    let mut heap: BinaryHeap<Reverse<Ranked>> = BinaryHeap::new();
    let mut stamp = 0usize;

    let mut evaluate = |fixings: Vec<(usize, bool)>,
                        depth: usize,
                        pool: &mut CutPool,
                        nodes_explored: &mut usize,
                        lp_solves: &mut usize|
     -> Result<Option<Node>, MlError> {
        *nodes_explored += 1;
        let bounds = box_with_fixings(n, &fixings);
        match adaptive_solve(code, llr, &bounds, extra_rows, pool, &decode_options)? {
            NodeLp::Infeasible => Ok(None),
            NodeLp::Solved(result) => {
                *lp_solves += result.lp_solves;
                Ok(Some(Node {
                    bound: result.objective,
                    fixings,
                    depth,
                    x: result.x,
                }))
            }
        }
    };

    if let Some(root) = evaluate(Vec::new(), 0, &mut pool, &mut nodes_explored, &mut lp_solves)? {
        stamp += 1;
        heap.push(Reverse(Ranked(root, stamp)));
    }

    while let Some(Reverse(Ranked(node, _))) = heap.pop() {
        if nodes_explored > options.node_budget {
            return Err(MlError::NodeBudgetExceeded {
                budget: options.node_budget,
            });
        }
        if !options.disable_pruning {
            if let Some((_, best)) = &incumbent {
                if node.bound >= best - 1e-9 {
                    continue;
                }
            }
        }
        if let Some(word) = integral_word(&node.x) {
            // An integral relaxation optimum is the best codeword within
            // this node; it can only improve the incumbent.
            debug_assert!(code.is_codeword(&word));
            let obj = node.bound;
            if incumbent.as_ref().is_none_or(|(_, best)| obj < *best) {
                incumbent = Some((word, obj));
            }
            continue;
        }
        // Branch on the most fractional coordinate, lowest index on ties.
        let branch_var = (0..n)
            .filter(|&i| node.x[i].min(1.0 - node.x[i]) > INTEGRALITY_TOL)
            .min_by(|&a, &b| {
                (node.x[a] - 0.5)
                    .abs()
                    .total_cmp(&(node.x[b] - 0.5).abs())
            })
            .expect("non-integral node has a fractional coordinate");
        for bit in [false, true] {
            let mut fixings = node.fixings.clone();
            fixings.push((branch_var, bit));
            if let Some(child) = evaluate(
                fixings,
                node.depth + 1,
                &mut pool,
                &mut nodes_explored,
                &mut lp_solves,
            )? {
                debug_assert!(
                    child.bound >= node.bound - 1e-9,
                    "child bound {} below parent bound {}",
                    child.bound,
                    node.bound
                );
                stamp += 1;
                heap.push(Reverse(Ranked(child, stamp)));
            }
        }
    }

    match incumbent {
        Some((codeword, objective)) => Ok(BnbOutcome {
            codeword,
            objective,
            nodes_explored,
            lp_solves,
            cuts_in_pool: pool.len(),
        }),
        None => Err(MlError::NoNonzeroCodewords),
    }
}

fn integral_word(x: &[f64]) -> Option<BitVec> {
    if x.iter().all(|&v| v.min(1.0 - v) <= INTEGRALITY_TOL) {
        Some(BitVec::from_bools(
            &x.iter().map(|&v| v > 0.5).collect::<Vec<_>>(),
        ))
    } else {
        None
    }
}

fn objective_of(llr: &[f64], word: &BitVec) -> f64 {
    (0..word.len())
        .filter(|&i| word.get(i))
        .map(|i| llr[i])
        .sum()
}

fn satisfies_extra_rows(word: &BitVec, rows: &[(Vec<f64>, RowSense, f64)]) -> bool {
    rows.iter().all(|(coeffs, sense, rhs)| {
        let lhs: f64 = (0..word.len())
            .filter(|&i| word.get(i))
            .map(|i| coeffs[i])
            .sum();
        match sense {
            RowSense::Le => lhs <= rhs + 1e-9,
            RowSense::Ge => lhs >= rhs - 1e-9,
            RowSense::Eq => (lhs - rhs).abs() <= 1e-9,
        }
    })
}

/// Minimum distance as an integer program: unit costs and a constraint
/// `sum x_i >= 1` in every node exclude the zero codeword, so the optimal
/// objective is the minimum Hamming weight.
pub fn min_distance_ip(code: &LinearCode) -> Result<usize, MlError> {
    min_distance_ip_with_options(code, &BnbOptions::default())
}

pub fn min_distance_ip_with_options(
    code: &LinearCode,
    options: &BnbOptions,
) -> Result<usize, MlError> {
    let n = code.block_len();
    let exclude_zero = vec![(vec![1.0; n], RowSense::Ge, 1.0)];
    let outcome = branch_and_bound(code, &vec![1.0; n], &exclude_zero, options)?;
    Ok(outcome.objective.round() as usize)
}
