//! Convolutional-code state machines, their trellis unrollings, linear-time
//! ML decoding by a shortest-path sweep, and LP decoding of parallel
//! concatenated (turbo) codes through coupled path-flow models.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::channel::LlrVector;
use crate::code::ENUM_LIMIT_K;
use crate::gf2::{BitMatrix, BitVec};
use crate::lp::INTEGRALITY_TOL;
use crate::simplex::{BoxLp, RowSense, SolveStatus};

#[derive(Debug, Error)]
pub enum TrellisError {
    #[error("transition table malformed: {0}")]
    BadTable(String),
    #[error("state {state}: the two input branches emit identical outputs")]
    OutputCollision { state: usize },
    #[error("information word does not return the encoder to the zero state (ends in {final_state})")]
    NotTerminated { final_state: usize },
    #[error("input has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("interleaver is not a permutation of 0..{expected}")]
    BadInterleaver { expected: usize },
    #[error("state machine is not linear over GF(2)")]
    NotLinear,
    #[error("enumeration over 2^{k} words exceeds the limit 2^{limit}")]
    TooLarge { k: usize, limit: usize },
    #[error("node budget of {budget} exhausted")]
    NodeBudgetExceeded { budget: usize },
    #[error("state machine config invalid: {0}")]
    Config(String),
}

/// A binary-input finite state machine with `2^memory` states; each step
/// consumes one information bit and emits a fixed number of output bits.
#[derive(Clone, Debug)]
pub struct Fsm {
    memory: usize,
    outputs_per_input: usize,
    /// `transitions[state][input] = (next_state, output)`.
    transitions: Vec<[(usize, Vec<bool>); 2]>,
}

impl Fsm {
    pub fn new(
        memory: usize,
        transitions: Vec<[(usize, Vec<bool>); 2]>,
    ) -> Result<Self, TrellisError> {
        let states = 1usize << memory;
        if transitions.len() != states {
            return Err(TrellisError::BadTable(format!(
                "{} entries for {states} states",
                transitions.len()
            )));
        }
        let outputs_per_input = transitions[0][0].1.len();
        if outputs_per_input == 0 {
            return Err(TrellisError::BadTable("outputs must be nonempty".into()));
        }
        for (s, branches) in transitions.iter().enumerate() {
            for (next, out) in branches {
                if *next >= states {
                    return Err(TrellisError::BadTable(format!(
                        "state {s} transitions to out-of-range state {next}"
                    )));
                }
                if out.len() != outputs_per_input {
                    return Err(TrellisError::BadTable(format!(
                        "state {s} emits {} bits, expected {outputs_per_input}",
                        out.len()
                    )));
                }
            }
            if branches[0].1 == branches[1].1 {
                return Err(TrellisError::OutputCollision { state: s });
            }
        }
        Ok(Self {
            memory,
            outputs_per_input,
            transitions,
        })
    }

    /// The memory-one accumulator: from state `s` on input `u`, move to and
    /// emit `s XOR u`.
    pub fn accumulator() -> Self {
        Self::new(
            1,
            vec![
                [(0, vec![false]), (1, vec![true])],
                [(1, vec![true]), (0, vec![false])],
            ],
        )
        .expect("accumulator table is well-formed")
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    pub fn outputs_per_input(&self) -> usize {
        self.outputs_per_input
    }

    pub fn step(&self, state: usize, input: bool) -> (usize, &[bool]) {
        let (next, out) = &self.transitions[state][usize::from(input)];
        (*next, out)
    }

    /// Whether one step of the machine is a linear map over GF(2) in the
    /// (state bits, input) pair; linearity of the step implies linearity of
    /// the whole encoding.
    pub fn is_linear(&self) -> bool {
        let states = self.num_states();
        let (zero_next, zero_out) = self.step(0, false);
        if zero_next != 0 || zero_out.iter().any(|&b| b) {
            return false;
        }
        for s in 0..states {
            for u in [false, true] {
                let (got_next, got_out) = self.step(s, u);
                let (sn, so) = self.step(s, false);
                let (un, uo) = self.step(0, u);
                if got_next != sn ^ un {
                    return false;
                }
                let want: Vec<bool> = so.iter().zip(uo).map(|(a, b)| a ^ b).collect();
                if got_out != want.as_slice() {
                    return false;
                }
            }
        }
        true
    }

    /// Parse a machine description from JSON:
    /// `{"memory": d, "transitions": [{"state": s, "input": 0|1,
    /// "next": s', "output": [bits]}, ...]}` with all `2^(d+1)` entries.
    pub fn from_json(text: &str) -> Result<Self, TrellisError> {
        #[derive(Deserialize)]
        struct Entry {
            state: usize,
            input: u8,
            next: usize,
            output: Vec<u8>,
        }
        #[derive(Deserialize)]
        struct Spec {
            memory: usize,
            transitions: Vec<Entry>,
        }
        let spec: Spec =
            serde_json::from_str(text).map_err(|e| TrellisError::Config(e.to_string()))?;
        let states = 1usize << spec.memory;
        if spec.transitions.len() != states * 2 {
            return Err(TrellisError::Config(format!(
                "need {} transition entries, got {}",
                states * 2,
                spec.transitions.len()
            )));
        }
        let mut table: Vec<[Option<(usize, Vec<bool>)>; 2]> = vec![[None, None]; states];
        for e in spec.transitions {
            if e.state >= states || e.input > 1 {
                return Err(TrellisError::Config(format!(
                    "entry (state {}, input {}) out of range",
                    e.state, e.input
                )));
            }
            let slot = &mut table[e.state][usize::from(e.input)];
            if slot.is_some() {
                return Err(TrellisError::Config(format!(
                    "duplicate entry for state {} input {}",
                    e.state, e.input
                )));
            }
            *slot = Some((e.next, e.output.iter().map(|&b| b != 0).collect()));
        }
        let transitions: Vec<[(usize, Vec<bool>); 2]> = table
            .into_iter()
            .enumerate()
            .map(|(s, [a, b])| {
                Ok([
                    a.ok_or_else(|| {
                        TrellisError::Config(format!("missing entry for state {s} input 0"))
                    })?,
                    b.ok_or_else(|| {
                        TrellisError::Config(format!("missing entry for state {s} input 1"))
                    })?,
                ])
            })
            .collect::<Result<_, TrellisError>>()?;
        Self::new(spec.memory, transitions)
    }
}

/// Encode an information word; the word must drive the machine back to the
/// zero state.
pub fn conv_encode(fsm: &Fsm, u: &BitVec) -> Result<BitVec, TrellisError> {
    let mut state = 0usize;
    let mut out = Vec::with_capacity(u.len() * fsm.outputs_per_input());
    for i in 0..u.len() {
        let (next, bits) = fsm.step(state, u.get(i));
        out.extend_from_slice(bits);
        state = next;
    }
    if state != 0 {
        return Err(TrellisError::NotTerminated { final_state: state });
    }
    Ok(BitVec::from_bools(&out))
}

/// One edge of a trellis: a transition taken at a specific segment.
#[derive(Clone, Debug)]
pub struct TrellisEdge {
    pub segment: usize,
    pub from: usize,
    pub to: usize,
    pub input: bool,
    pub output: Vec<bool>,
}

/// The layered unrolling of a state machine over `k` steps, pruned so that
/// every remaining edge lies on some zero-state-to-zero-state path. Paths
/// through the trellis are in bijection with the terminating codewords.
#[derive(Clone, Debug)]
pub struct Trellis {
    pub info_len: usize,
    pub outputs_per_input: usize,
    edges: Vec<TrellisEdge>,
    segment_edges: Vec<Vec<usize>>,
    /// States present per layer after pruning, ascending.
    layer_states: Vec<Vec<usize>>,
}

impl Trellis {
    pub fn edges(&self) -> &[TrellisEdge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge ids of segment `i` (between layers `i` and `i+1`).
    pub fn segment_edges(&self, i: usize) -> &[usize] {
        &self.segment_edges[i]
    }

    pub fn layer_states(&self, layer: usize) -> &[usize] {
        &self.layer_states[layer]
    }

    /// Output length `k * o` covered by the trellis.
    pub fn output_len(&self) -> usize {
        self.info_len * self.outputs_per_input
    }
}

pub fn build_trellis(fsm: &Fsm, k: usize) -> Trellis {
    assert!(k >= 1);
    let states = fsm.num_states();
    // Forward reachability from the zero state.
    let mut reach = vec![vec![false; states]; k + 1];
    reach[0][0] = true;
    for i in 0..k {
        for s in 0..states {
            if reach[i][s] {
                for u in [false, true] {
                    let (next, _) = fsm.step(s, u);
                    reach[i + 1][next] = true;
                }
            }
        }
    }
    // Backward co-reachability of the zero state at layer k.
    let mut coreach = vec![vec![false; states]; k + 1];
    coreach[k][0] = true;
    for i in (0..k).rev() {
        for s in 0..states {
            for u in [false, true] {
                let (next, _) = fsm.step(s, u);
                if coreach[i + 1][next] {
                    coreach[i][s] = true;
                }
            }
        }
    }
    let mut edges = Vec::new();
    let mut segment_edges = vec![Vec::new(); k];
    for (i, seg) in segment_edges.iter_mut().enumerate() {
        for s in 0..states {
            if !reach[i][s] || !coreach[i][s] {
                continue;
            }
            for u in [false, true] {
                let (next, out) = fsm.step(s, u);
                if reach[i + 1][next] && coreach[i + 1][next] {
                    seg.push(edges.len());
                    edges.push(TrellisEdge {
                        segment: i,
                        from: s,
                        to: next,
                        input: u,
                        output: out.to_vec(),
                    });
                }
            }
        }
    }
    let layer_states = (0..=k)
        .map(|i| {
            (0..states)
                .filter(|&s| reach[i][s] && coreach[i][s])
                .collect()
        })
        .collect();
    Trellis {
        info_len: k,
        outputs_per_input: fsm.outputs_per_input(),
        edges,
        segment_edges,
        layer_states,
    }
}

/// Cost of an edge under the LLR vector: the objective share of the output
/// bits it sets to one.
fn edge_output_cost(edge: &TrellisEdge, o: usize, llr: &[f64]) -> f64 {
    edge.output
        .iter()
        .enumerate()
        .filter(|(_, &bit)| bit)
        .map(|(j, _)| llr[edge.segment * o + j])
        .sum()
}

/// Exact ML decoding of the terminated convolutional code by a single
/// forward dynamic-programming sweep over the trellis layers.
pub fn shortest_path_decode(trellis: &Trellis, llr: &LlrVector) -> (BitVec, f64) {
    assert_eq!(llr.len(), trellis.output_len(), "LLR length mismatch");
    let o = trellis.outputs_per_input;
    let states = trellis
        .layer_states
        .iter()
        .flat_map(|l| l.iter().copied())
        .max()
        .unwrap_or(0)
        + 1;
    let k = trellis.info_len;
    let mut dist = vec![vec![f64::INFINITY; states]; k + 1];
    let mut pred: Vec<Vec<Option<usize>>> = vec![vec![None; states]; k + 1];
    dist[0][0] = 0.0;
    for i in 0..k {
        for &eid in trellis.segment_edges(i) {
            let e = &trellis.edges[eid];
            let candidate = dist[i][e.from] + edge_output_cost(e, o, llr.as_slice());
            if candidate < dist[i + 1][e.to] {
                dist[i + 1][e.to] = candidate;
                pred[i + 1][e.to] = Some(eid);
            }
        }
    }
    let mut bits = vec![false; trellis.output_len()];
    let mut state = 0usize;
    for i in (0..k).rev() {
        let eid = pred[i + 1][state].expect("pruned trellis keeps a path to zero");
        let e = &trellis.edges[eid];
        for (j, &b) in e.output.iter().enumerate() {
            bits[i * o + j] = b;
        }
        state = e.from;
    }
    (BitVec::from_bools(&bits), dist[k][0])
}

/// The linear map taking an information word to the encoder's final state
/// bits; its nullspace is the set of terminating words. Requires a linear
/// machine.
pub fn termination_map(fsm: &Fsm, k: usize) -> Result<BitMatrix, TrellisError> {
    if !fsm.is_linear() {
        return Err(TrellisError::NotLinear);
    }
    let d = fsm.memory().max(1);
    let mut map = BitMatrix::zeros(d, k).expect("k >= 1");
    for i in 0..k {
        let mut state = 0usize;
        for step in 0..k {
            let (next, _) = fsm.step(state, step == i);
            state = next;
        }
        for bit in 0..d {
            if state >> bit & 1 == 1 {
                map.set(bit, i, true);
            }
        }
    }
    Ok(map)
}

/// A rate-1/3 parallel concatenation: the codeword is the information word,
/// the first component's parity, and the second component's parity computed
/// on the interleaved word.
#[derive(Clone, Debug)]
pub struct TurboCode {
    fsm: Fsm,
    info_len: usize,
    interleaver: Vec<usize>,
    trellis: Trellis,
}

impl TurboCode {
    pub fn new(fsm: Fsm, info_len: usize, interleaver: Vec<usize>) -> Result<Self, TrellisError> {
        if interleaver.len() != info_len {
            return Err(TrellisError::BadInterleaver {
                expected: info_len,
            });
        }
        let mut seen = vec![false; info_len];
        for &p in &interleaver {
            if p >= info_len || seen[p] {
                return Err(TrellisError::BadInterleaver {
                    expected: info_len,
                });
            }
            seen[p] = true;
        }
        if !fsm.is_linear() {
            return Err(TrellisError::NotLinear);
        }
        let trellis = build_trellis(&fsm, info_len);
        Ok(Self {
            fsm,
            info_len,
            interleaver,
            trellis,
        })
    }

    /// Fisher-Yates interleaver from a seeded generator.
    pub fn with_random_interleaver(
        fsm: Fsm,
        info_len: usize,
        seed: u64,
    ) -> Result<Self, TrellisError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..info_len).collect();
        for i in (1..info_len).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        Self::new(fsm, info_len, perm)
    }

    pub fn fsm(&self) -> &Fsm {
        &self.fsm
    }

    pub fn info_len(&self) -> usize {
        self.info_len
    }

    pub fn interleaver(&self) -> &[usize] {
        &self.interleaver
    }

    /// The shared component trellis (both encoders run the same machine).
    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// Codeword length `k + 2 k o`.
    pub fn block_len(&self) -> usize {
        self.info_len + 2 * self.info_len * self.fsm.outputs_per_input()
    }

    /// Rate ignoring termination loss; one third when the components emit
    /// one bit per input.
    pub fn nominal_rate(&self) -> f64 {
        self.info_len as f64 / self.block_len() as f64
    }

    /// Exact rate: the dimension of the admissible-word subspace (both
    /// component encoders terminate) over the block length.
    pub fn realized_rate(&self) -> f64 {
        self.admissible_dimension() as f64 / self.block_len() as f64
    }

    /// Dimension of the subspace of information words for which both
    /// encoders terminate.
    pub fn admissible_dimension(&self) -> usize {
        self.info_len - self.termination_constraints().rank()
    }

    /// Basis of the admissible-word subspace.
    pub fn admissible_basis(&self) -> Vec<BitVec> {
        self.termination_constraints().nullspace()
    }

    /// Stacked termination conditions of both components; the second block
    /// is composed with the interleaver.
    fn termination_constraints(&self) -> BitMatrix {
        let t = termination_map(&self.fsm, self.info_len)
            .expect("constructor verified linearity");
        let d = t.rows();
        let mut stacked = BitMatrix::zeros(2 * d, self.info_len).expect("k >= 1");
        for r in 0..d {
            for c in 0..self.info_len {
                if t.get(r, c) {
                    stacked.set(r, c, true);
                    // Second component sees bit c at position interleaver[c]:
                    // (T P)_{r,c'} with P mapping c -> interleaver[c].
                }
            }
        }
        for r in 0..d {
            for c in 0..self.info_len {
                // Column c of T composed with the interleaver: the entry
                // multiplying u_c is T[r][interleaver[c]].
                if t.get(r, self.interleaver[c]) {
                    stacked.set(d + r, c, true);
                }
            }
        }
        stacked
    }

    /// The interleaved word: bit `i` of the input lands at position
    /// `interleaver[i]`.
    pub fn permute(&self, u: &BitVec) -> BitVec {
        assert_eq!(u.len(), self.info_len);
        let mut out = BitVec::zeros(self.info_len);
        for i in 0..self.info_len {
            if u.get(i) {
                out.set(self.interleaver[i], true);
            }
        }
        out
    }

    /// Encode an admissible information word; both component encoders must
    /// terminate.
    pub fn encode(&self, u: &BitVec) -> Result<BitVec, TrellisError> {
        if u.len() != self.info_len {
            return Err(TrellisError::LengthMismatch {
                got: u.len(),
                expected: self.info_len,
            });
        }
        let pa = conv_encode(&self.fsm, u)?;
        let pb = conv_encode(&self.fsm, &self.permute(u))?;
        let mut bits = Vec::with_capacity(self.block_len());
        bits.extend(u.iter());
        bits.extend(pa.iter());
        bits.extend(pb.iter());
        Ok(BitVec::from_bools(&bits))
    }

    /// All admissible information words, for oracle use on small codes.
    pub fn admissible_info_words(&self) -> Result<Vec<BitVec>, TrellisError> {
        let basis = self.admissible_basis();
        if basis.len() > ENUM_LIMIT_K {
            return Err(TrellisError::TooLarge {
                k: basis.len(),
                limit: ENUM_LIMIT_K,
            });
        }
        let mut words = Vec::with_capacity(1 << basis.len());
        let mut current = BitVec::zeros(self.info_len);
        words.push(current.clone());
        for i in 1u64..1 << basis.len() {
            current.xor_assign(&basis[i.trailing_zeros() as usize]);
            words.push(current.clone());
        }
        Ok(words)
    }

    /// A uniformly random admissible information word.
    pub fn random_admissible_info(&self, rng: &mut ChaCha8Rng) -> BitVec {
        let basis = self.admissible_basis();
        let mut u = BitVec::zeros(self.info_len);
        for b in &basis {
            if rng.random::<bool>() {
                u.xor_assign(b);
            }
        }
        u
    }
}

/// Exhaustive ML over all admissible turbo information words.
pub fn brute_force_turbo_ml(
    tc: &TurboCode,
    llr: &LlrVector,
) -> Result<(BitVec, f64), TrellisError> {
    assert_eq!(llr.len(), tc.block_len());
    let words = tc.admissible_info_words()?;
    let best = words
        .into_iter()
        .map(|u| {
            let x = tc.encode(&u).expect("admissible word terminates");
            let obj = llr.objective_of(&x);
            (x, obj)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("the zero word is always admissible");
    Ok(best)
}

/// Outcome of the coupled-flow turbo LP.
#[derive(Clone, Debug)]
pub struct TurboLpOutcome {
    /// Edge flows of the first component, indexed like the trellis edges.
    pub flows_a: Vec<f64>,
    /// Edge flows of the second component.
    pub flows_b: Vec<f64>,
    /// Implied code bits: systematic, first parity, second parity.
    pub x: Vec<f64>,
    pub objective: f64,
    pub integral: bool,
    pub ml_certificate: bool,
    /// The decoded codeword when the flows are integral.
    pub codeword: Option<BitVec>,
    pub lp_solves: usize,
}

struct TurboLpLayout {
    edge_count: usize,
}

impl TurboLpLayout {
    fn var_of(&self, component: usize, edge: usize) -> usize {
        component * self.edge_count + edge
    }
}

/// Path-flow rows (unit source flow, conservation, unit sink flow) for one
/// component's copy of the trellis.
fn flow_rows(
    trellis: &Trellis,
    layout: &TurboLpLayout,
    component: usize,
    num_vars: usize,
) -> Vec<(Vec<f64>, RowSense, f64)> {
    let k = trellis.info_len;
    let mut rows = Vec::new();
    let mut source = vec![0.0; num_vars];
    for &eid in trellis.segment_edges(0) {
        source[layout.var_of(component, eid)] = 1.0;
    }
    rows.push((source, RowSense::Eq, 1.0));
    for layer in 1..k {
        for &state in trellis.layer_states(layer) {
            let mut row = vec![0.0; num_vars];
            for &eid in trellis.segment_edges(layer) {
                if trellis.edges()[eid].from == state {
                    row[layout.var_of(component, eid)] = 1.0;
                }
            }
            for &eid in trellis.segment_edges(layer - 1) {
                if trellis.edges()[eid].to == state {
                    row[layout.var_of(component, eid)] -= 1.0;
                }
            }
            rows.push((row, RowSense::Eq, 0.0));
        }
    }
    let mut sink = vec![0.0; num_vars];
    for &eid in trellis.segment_edges(k - 1) {
        if trellis.edges()[eid].to == 0 {
            sink[layout.var_of(component, eid)] = 1.0;
        }
    }
    rows.push((sink, RowSense::Eq, 1.0));
    rows
}

/// Solve the single-trellis path LP for given edge costs; the path polytope
/// is integral, so the optimum is always a genuine path.
pub fn shortest_path_flow_lp(trellis: &Trellis, edge_costs: &[f64]) -> (Vec<f64>, f64) {
    assert_eq!(edge_costs.len(), trellis.num_edges());
    let layout = TurboLpLayout {
        edge_count: trellis.num_edges(),
    };
    let n = trellis.num_edges();
    let mut lp = BoxLp::new(edge_costs, &vec![(0.0, 1.0); n]);
    for (coeffs, sense, rhs) in flow_rows(trellis, &layout, 0, n) {
        lp.add_row(&coeffs, sense, rhs);
    }
    let status = lp.solve();
    assert_eq!(status, SolveStatus::Optimal, "path LP is always feasible");
    (lp.x(), lp.objective_value())
}

/// Costs and rows of the coupled (or uncoupled) two-trellis flow model.
/// Variables are the edge flows of component 0 then component 1.
fn turbo_model(
    tc: &TurboCode,
    llr: &LlrVector,
    couple: bool,
) -> (Vec<f64>, Vec<(Vec<f64>, RowSense, f64)>) {
    let trellis = tc.trellis();
    let k = tc.info_len();
    let o = tc.fsm().outputs_per_input();
    let layout = TurboLpLayout {
        edge_count: trellis.num_edges(),
    };
    let num_vars = 2 * trellis.num_edges();
    let lam = llr.as_slice();
    let (lam_sys, rest) = lam.split_at(k);
    let (lam_pa, lam_pb) = rest.split_at(k * o);

    // Edge costs: the first component carries the systematic share through
    // its input labels, both components carry their parity share through
    // the output labels.
    let mut cost = vec![0.0; num_vars];
    for (eid, edge) in trellis.edges().iter().enumerate() {
        let mut ca = edge_output_cost(edge, o, lam_pa);
        if edge.input {
            ca += lam_sys[edge.segment];
        }
        cost[layout.var_of(0, eid)] = ca;
        cost[layout.var_of(1, eid)] = edge_output_cost(edge, o, lam_pb);
    }

    let mut rows = Vec::new();
    for component in 0..2 {
        rows.extend(flow_rows(trellis, &layout, component, num_vars));
    }
    if couple {
        // Input agreement: the systematic bit entering segment i of the
        // first trellis equals the one entering segment interleaver[i] of
        // the second.
        for i in 0..k {
            let mut row = vec![0.0; num_vars];
            for &eid in trellis.segment_edges(i) {
                if trellis.edges()[eid].input {
                    row[layout.var_of(0, eid)] = 1.0;
                }
            }
            for &eid in trellis.segment_edges(tc.interleaver()[i]) {
                if trellis.edges()[eid].input {
                    row[layout.var_of(1, eid)] -= 1.0;
                }
            }
            rows.push((row, RowSense::Eq, 0.0));
        }
    }
    (cost, rows)
}

fn turbo_lp_core(tc: &TurboCode, llr: &LlrVector, couple: bool) -> TurboLpOutcome {
    assert_eq!(llr.len(), tc.block_len());
    let trellis = tc.trellis();
    let k = tc.info_len();
    let o = tc.fsm().outputs_per_input();
    let e = trellis.num_edges();
    let (cost, rows) = turbo_model(tc, llr, couple);
    let mut lp = BoxLp::new(&cost, &vec![(0.0, 1.0); cost.len()]);
    for (coeffs, sense, rhs) in &rows {
        lp.add_row(coeffs, *sense, *rhs);
    }
    let status = lp.solve();
    assert_eq!(status, SolveStatus::Optimal, "turbo flow LP is feasible");

    let flows = lp.x();
    let (flows_a, flows_b) = flows.split_at(e);
    let mut x = vec![0.0; tc.block_len()];
    for (eid, edge) in trellis.edges().iter().enumerate() {
        let i = edge.segment;
        if edge.input {
            x[i] += flows_a[eid];
        }
        for (j, &bit) in edge.output.iter().enumerate() {
            if bit {
                x[k + i * o + j] += flows_a[eid];
                x[k + k * o + i * o + j] += flows_b[eid];
            }
        }
    }
    // The second component's systematic share is implied by agreement; the
    // parity blocks above complete the codeword.
    let integral = flows.iter().all(|&f| f.min(1.0 - f) <= INTEGRALITY_TOL);
    let codeword = integral.then(|| {
        BitVec::from_bools(&x.iter().map(|&v| v > 0.5).collect::<Vec<_>>())
    });
    let objective = lp.objective_value();
    TurboLpOutcome {
        flows_a: flows_a.to_vec(),
        flows_b: flows_b.to_vec(),
        x,
        objective,
        integral,
        ml_certificate: integral && couple,
        codeword,
        lp_solves: lp.lp_solves,
    }
}

/// LP decoding of a turbo code: path-flow models of both component
/// trellises coupled by input-agreement rows. Integral flows certify the
/// exact ML codeword; the relaxation may also end on a fractional vertex.
pub fn turbo_lp_decode(tc: &TurboCode, llr: &LlrVector) -> TurboLpOutcome {
    turbo_lp_core(tc, llr, true)
}

/// The uncoupled pair of flow LPs, equal to two independent shortest-path
/// decodes; exposed for cross-checking.
pub fn turbo_lp_decode_uncoupled(tc: &TurboCode, llr: &LlrVector) -> TurboLpOutcome {
    turbo_lp_core(tc, llr, false)
}

/// Exact ML turbo decoding: branch-and-bound over the coupled flow LP,
/// branching on the most fractional flow variable.
pub fn turbo_ml_decode_bnb(
    tc: &TurboCode,
    llr: &LlrVector,
    node_budget: usize,
) -> Result<(BitVec, f64, usize), TrellisError> {
    assert_eq!(llr.len(), tc.block_len());
    let trellis = tc.trellis();
    let e = trellis.num_edges();
    let (cost, rows) = turbo_model(tc, llr, true);
    // Nodes differ only in the flow bounds.
    let solve_node = |fixings: &[(usize, f64)]| -> Option<(Vec<f64>, f64)> {
        let mut bounds = vec![(0.0, 1.0); cost.len()];
        for &(var, v) in fixings {
            bounds[var] = (v, v);
        }
        let mut lp = BoxLp::new(&cost, &bounds);
        for (coeffs, sense, rhs) in &rows {
            lp.add_row(coeffs, *sense, *rhs);
        }
        match lp.solve() {
            SolveStatus::Optimal => Some((lp.x(), lp.objective_value())),
            SolveStatus::Infeasible => None,
            status => panic!("turbo node LP ended {status:?}"),
        }
    };

    let mut nodes = 0usize;
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut stack: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
    while let Some(fixings) = stack.pop() {
        nodes += 1;
        if nodes > node_budget {
            return Err(TrellisError::NodeBudgetExceeded {
                budget: node_budget,
            });
        }
        let Some((flows, bound)) = solve_node(&fixings) else {
            continue;
        };
        if let Some((_, best)) = &incumbent {
            if bound >= best - 1e-9 {
                continue;
            }
        }
        let fractional = (0..flows.len())
            .filter(|&j| flows[j].min(1.0 - flows[j]) > INTEGRALITY_TOL)
            .min_by(|&a, &b| (flows[a] - 0.5).abs().total_cmp(&(flows[b] - 0.5).abs()));
        match fractional {
            None => {
                if incumbent.as_ref().is_none_or(|(_, best)| bound < *best) {
                    incumbent = Some((flows, bound));
                }
            }
            Some(var) => {
                for v in [0.0, 1.0] {
                    let mut child = fixings.clone();
                    child.push((var, v));
                    stack.push(child);
                }
            }
        }
    }
    let (flows, objective) = incumbent.expect("the zero path pair is always feasible");
    // Rebuild the codeword from the integral flows.
    let k = tc.info_len();
    let o = tc.fsm().outputs_per_input();
    let mut x = vec![0.0; tc.block_len()];
    for (eid, edge) in trellis.edges().iter().enumerate() {
        let i = edge.segment;
        if edge.input {
            x[i] += flows[eid];
        }
        for (j, &bit) in edge.output.iter().enumerate() {
            if bit {
                x[k + i * o + j] += flows[eid];
                x[k + k * o + i * o + j] += flows[e + eid];
            }
        }
    }
    let word = BitVec::from_bools(&x.iter().map(|&v| v > 0.5).collect::<Vec<_>>());
    Ok((word, objective, nodes))
}
