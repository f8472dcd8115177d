//! Binary linear block codes defined by a parity-check matrix: encoding,
//! codeword enumeration, factor graphs and graph covers.

use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec};

/// Enumeration guard: `codewords` and friends refuse to expand more than
/// `2^ENUM_LIMIT_K` words.
pub const ENUM_LIMIT_K: usize = 20;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("parity-check matrix has no nonzero entry")]
    ZeroMatrix,
    #[error("parity-check row {0} is all-zero")]
    ZeroRow(usize),
    #[error("information word has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("enumeration of 2^{k} codewords exceeds the limit 2^{limit}")]
    TooLarge { k: usize, limit: usize },
    #[error("code has no nonzero codewords")]
    NoNonzeroCodewords,
    #[error("cover permutations malformed: {0}")]
    PermutationMismatch(String),
    #[error("vector is not a codeword of the cover code")]
    NotCoverCodeword,
}

/// Bipartite graph with one check node per parity-check row and one variable
/// node per code bit; edge `(j, i)` present exactly when `H[j][i] = 1`.
#[derive(Clone, Debug)]
pub struct FactorGraph {
    pub check_nodes: usize,
    pub variable_nodes: usize,
    /// Edges as `(check, variable)` pairs in row-major scan order of H.
    pub edges: Vec<(usize, usize)>,
}

/// A binary linear block code given by its parity-check matrix.
///
/// The matrix may contain redundant (dependent) rows; they are kept because
/// the decoding polytope depends on the concrete matrix, not just on the
/// code. Immutable after construction.
#[derive(Clone, Debug)]
pub struct LinearCode {
    h: BitMatrix,
    k: usize,
    checks: Vec<Vec<usize>>,
    generator: Vec<BitVec>,
}

impl LinearCode {
    pub fn from_parity_check(h: BitMatrix) -> Result<Self, CodeError> {
        if h.is_zero() {
            return Err(CodeError::ZeroMatrix);
        }
        let checks: Vec<Vec<usize>> = (0..h.rows()).map(|j| h.row_support(j)).collect();
        if let Some(j) = checks.iter().position(|c| c.is_empty()) {
            return Err(CodeError::ZeroRow(j));
        }
        let generator = h.nullspace();
        let k = generator.len();
        Ok(Self {
            h,
            k,
            checks,
            generator,
        })
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.h
    }

    /// Block length n.
    pub fn block_len(&self) -> usize {
        self.h.cols()
    }

    /// Information length k = n - rank(H).
    pub fn info_len(&self) -> usize {
        self.k
    }

    /// Number of parity-check rows m (may exceed n - k).
    pub fn num_checks(&self) -> usize {
        self.h.rows()
    }

    /// Support N_j of check row `j`.
    pub fn check_support(&self, j: usize) -> &[usize] {
        &self.checks[j]
    }

    pub fn is_codeword(&self, x: &BitVec) -> bool {
        x.len() == self.block_len() && self.h.mul_vec(x).is_zero()
    }

    /// Encode an information word through the generator derived from the
    /// nullspace of H. The map is GF(2)-linear and injective; any such
    /// bijection onto the code is a valid encoder.
    pub fn encode(&self, u: &BitVec) -> Result<BitVec, CodeError> {
        if u.len() != self.k {
            return Err(CodeError::LengthMismatch {
                got: u.len(),
                expected: self.k,
            });
        }
        let mut x = BitVec::zeros(self.block_len());
        for (i, g) in self.generator.iter().enumerate() {
            if u.get(i) {
                x.xor_assign(g);
            }
        }
        Ok(x)
    }

    /// All `2^k` codewords. Enumeration order follows a Gray code over the
    /// information words, so consecutive entries differ by one generator row.
    pub fn codewords(&self) -> Result<Vec<BitVec>, CodeError> {
        if self.k > ENUM_LIMIT_K {
            return Err(CodeError::TooLarge {
                k: self.k,
                limit: ENUM_LIMIT_K,
            });
        }
        let mut words = Vec::with_capacity(1 << self.k);
        let mut current = BitVec::zeros(self.block_len());
        words.push(current.clone());
        for i in 1u64..1 << self.k {
            let flipped = i.trailing_zeros() as usize;
            current.xor_assign(&self.generator[flipped]);
            words.push(current.clone());
        }
        Ok(words)
    }

    /// Minimum Hamming weight over the nonzero codewords, by exhaustive
    /// enumeration. Serves as the oracle for the IP-based computation.
    pub fn min_distance_bruteforce(&self) -> Result<usize, CodeError> {
        if self.k == 0 {
            return Err(CodeError::NoNonzeroCodewords);
        }
        let words = self.codewords()?;
        Ok(words
            .iter()
            .filter(|w| !w.is_zero())
            .map(|w| w.weight())
            .min()
            .expect("k >= 1 implies a nonzero codeword"))
    }

    pub fn factor_graph(&self) -> FactorGraph {
        let mut edges = Vec::with_capacity(self.h.count_ones());
        for (j, support) in self.checks.iter().enumerate() {
            for &i in support {
                edges.push((j, i));
            }
        }
        FactorGraph {
            check_nodes: self.num_checks(),
            variable_nodes: self.block_len(),
            edges,
        }
    }

    /// Build the degree-`m` cover code: every check and variable node is
    /// copied `m` times and the copies of each base edge `(j, i)` are rewired
    /// by `perms[e]`, one permutation of `0..m` per edge of the factor graph
    /// (in factor-graph edge order). Check copy `(j, t)` connects to variable
    /// copy `(i, perms[e][t])`.
    ///
    /// Variable copies are laid out copy-contiguously: column `i * m + l` of
    /// the cover matrix is the `l`-th copy of base variable `i`, and row
    /// `j * m + t` is the `t`-th copy of base check `j`.
    pub fn build_cover(&self, m: usize, perms: &[Vec<usize>]) -> Result<LinearCode, CodeError> {
        if m == 0 {
            return Err(CodeError::PermutationMismatch(
                "cover degree must be at least 1".into(),
            ));
        }
        let graph = self.factor_graph();
        if perms.len() != graph.edges.len() {
            return Err(CodeError::PermutationMismatch(format!(
                "got {} permutations for {} edges",
                perms.len(),
                graph.edges.len()
            )));
        }
        for p in perms {
            if p.len() != m {
                return Err(CodeError::PermutationMismatch(format!(
                    "permutation length {} != cover degree {m}",
                    p.len()
                )));
            }
            let mut seen = vec![false; m];
            for &v in p {
                if v >= m || seen[v] {
                    return Err(CodeError::PermutationMismatch(
                        "entries must form a permutation of 0..m".into(),
                    ));
                }
                seen[v] = true;
            }
        }
        let mut cover_h = BitMatrix::zeros(self.num_checks() * m, self.block_len() * m)
            .expect("base code is nonempty");
        for (e, &(j, i)) in graph.edges.iter().enumerate() {
            for (t, &l) in perms[e].iter().enumerate() {
                cover_h.set(j * m + t, i * m + l, true);
            }
        }
        LinearCode::from_parity_check(cover_h)
    }

    /// Average the `m` copies of each base variable of a cover codeword down
    /// to a rational point of the base code's decoding polytope. `self` must
    /// be the cover code produced by [`build_cover`](Self::build_cover) with
    /// degree `m`.
    pub fn scaled_pseudocodeword(
        &self,
        cover_word: &BitVec,
        m: usize,
    ) -> Result<Vec<f64>, CodeError> {
        if m == 0 || self.block_len() % m != 0 || cover_word.len() != self.block_len() {
            return Err(CodeError::NotCoverCodeword);
        }
        if !self.is_codeword(cover_word) {
            return Err(CodeError::NotCoverCodeword);
        }
        let base_n = self.block_len() / m;
        let mut x = vec![0.0; base_n];
        for (i, xi) in x.iter_mut().enumerate() {
            let ones = (0..m).filter(|&l| cover_word.get(i * m + l)).count();
            *xi = ones as f64 / m as f64;
        }
        Ok(x)
    }
}

/// Small named codes used by the CLI and the test suite.
pub mod catalog {
    use super::LinearCode;
    use crate::gf2::BitMatrix;

    /// The (7,4) example code whose parity-check matrix is
    /// `[[1,1,0,1,1,0,0],[0,1,1,1,0,1,0],[0,0,0,1,1,1,1]]`.
    pub fn fig35() -> LinearCode {
        LinearCode::from_parity_check(
            BitMatrix::from_rows(&[
                vec![1, 1, 0, 1, 1, 0, 0],
                vec![0, 1, 1, 1, 0, 1, 0],
                vec![0, 0, 0, 1, 1, 1, 1],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    /// (2,1) repetition code.
    pub fn rep2() -> LinearCode {
        LinearCode::from_parity_check(BitMatrix::from_rows(&[vec![1, 1]]).unwrap()).unwrap()
    }

    /// Single parity check on three bits.
    pub fn spc3() -> LinearCode {
        LinearCode::from_parity_check(BitMatrix::from_rows(&[vec![1, 1, 1]]).unwrap()).unwrap()
    }

    /// The standard (7,4) Hamming code.
    pub fn hamming74() -> LinearCode {
        LinearCode::from_parity_check(
            BitMatrix::from_rows(&[
                vec![1, 0, 1, 0, 1, 0, 1],
                vec![0, 1, 1, 0, 0, 1, 1],
                vec![0, 0, 0, 1, 1, 1, 1],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    pub fn by_name(name: &str) -> Option<LinearCode> {
        match name {
            "fig35" => Some(fig35()),
            "rep2" => Some(rep2()),
            "spc3" => Some(spc3()),
            "hamming74" => Some(hamming74()),
            _ => None,
        }
    }

    pub const NAMES: &[&str] = &["fig35", "rep2", "spc3", "hamming74"];
}

#[cfg(test)]
mod tests {
    use super::catalog::{fig35, rep2, spc3};
    use super::*;
    use crate::gf2::BitMatrix;

    fn all_binary_vectors(n: usize) -> impl Iterator<Item = BitVec> {
        (0u64..1 << n)
            .map(move |bits| BitVec::from_bools(&(0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>()))
    }

    #[test]
    fn example_code_dimensions() {
        let c = fig35();
        assert_eq!(c.block_len(), 7);
        assert_eq!(c.info_len(), 4);
        assert_eq!(c.num_checks(), 3);
    }

    #[test]
    fn repetition_code() {
        let c = rep2();
        assert_eq!((c.block_len(), c.info_len()), (2, 1));
        let words = c.codewords().unwrap();
        assert_eq!(words.len(), 2);
        assert_eq!(c.min_distance_bruteforce().unwrap(), 2);
        assert_eq!(
            c.encode(&BitVec::from_ints(&[1])).unwrap(),
            BitVec::from_ints(&[1, 1])
        );
    }

    #[test]
    fn two_check_chain_has_two_codewords() {
        let h = BitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let c = LinearCode::from_parity_check(h).unwrap();
        assert_eq!((c.block_len(), c.info_len()), (3, 1));
        // Oracle: enumerate all 2^3 vectors against Hx = 0.
        let words: Vec<_> = all_binary_vectors(3).filter(|v| c.is_codeword(v)).collect();
        assert_eq!(words.len(), 2);
        assert!(words.iter().any(|w| w.is_zero()));
        assert!(words.iter().any(|w| w.weight() == 3));
    }

    #[test]
    fn zero_matrix_rejected() {
        let h = BitMatrix::zeros(2, 3).unwrap();
        assert!(matches!(
            LinearCode::from_parity_check(h),
            Err(CodeError::ZeroMatrix)
        ));
    }

    #[test]
    fn zero_row_rejected() {
        let h = BitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 0, 0]]).unwrap();
        assert!(matches!(
            LinearCode::from_parity_check(h),
            Err(CodeError::ZeroRow(1))
        ));
    }

    #[test]
    fn encode_zero_is_zero_and_length_checked() {
        let c = fig35();
        assert!(c.encode(&BitVec::zeros(4)).unwrap().is_zero());
        assert!(matches!(
            c.encode(&BitVec::zeros(3)),
            Err(CodeError::LengthMismatch { got: 3, expected: 4 })
        ));
    }

    #[test]
    fn encode_is_bijection_onto_nullspace_solutions() {
        let c = fig35();
        let image: std::collections::HashSet<Vec<bool>> = (0..16u32)
            .map(|u| {
                let info = BitVec::from_bools(&(0..4).map(|i| u >> i & 1 == 1).collect::<Vec<_>>());
                c.encode(&info).unwrap().to_bools()
            })
            .collect();
        let solutions: std::collections::HashSet<Vec<bool>> = all_binary_vectors(7)
            .filter(|v| c.is_codeword(v))
            .map(|v| v.to_bools())
            .collect();
        assert_eq!(image.len(), 16);
        assert_eq!(image, solutions);
    }

    #[test]
    fn encode_is_linear() {
        let c = fig35();
        for u in 0..16u32 {
            for v in 0..16u32 {
                let bu = BitVec::from_bools(&(0..4).map(|i| u >> i & 1 == 1).collect::<Vec<_>>());
                let bv = BitVec::from_bools(&(0..4).map(|i| v >> i & 1 == 1).collect::<Vec<_>>());
                let mut sum = bu.clone();
                sum.xor_assign(&bv);
                let mut xor_of_images = c.encode(&bu).unwrap();
                xor_of_images.xor_assign(&c.encode(&bv).unwrap());
                assert_eq!(c.encode(&sum).unwrap(), xor_of_images);
            }
        }
    }

    #[test]
    fn spc_codewords_are_even_weight() {
        let c = spc3();
        let words = c.codewords().unwrap();
        assert_eq!(words.len(), 4);
        assert!(words.iter().all(|w| w.weight() % 2 == 0));
        assert_eq!(c.min_distance_bruteforce().unwrap(), 2);
    }

    #[test]
    fn example_min_distance_matches_scan() {
        let c = fig35();
        // Independent scan over the 15 nonzero codewords.
        let scan = c
            .codewords()
            .unwrap()
            .iter()
            .filter(|w| !w.is_zero())
            .map(|w| w.weight())
            .min()
            .unwrap();
        assert_eq!(c.min_distance_bruteforce().unwrap(), scan);
    }

    #[test]
    fn codeword_count_is_exactly_two_to_the_k() {
        for code in [fig35(), rep2(), spc3(), super::catalog::hamming74()] {
            let words = code.codewords().unwrap();
            assert_eq!(words.len(), 1 << code.info_len());
            let distinct: std::collections::HashSet<_> =
                words.iter().map(|w| w.to_bools()).collect();
            assert_eq!(distinct.len(), words.len());
            assert!(words.iter().all(|w| code.is_codeword(w)));
        }
    }

    #[test]
    fn supercode_intersection() {
        // A vector is a codeword iff it satisfies every single row's parity.
        let c = fig35();
        for v in all_binary_vectors(7) {
            let rowwise = (0..c.num_checks()).all(|j| {
                c.check_support(j)
                    .iter()
                    .filter(|&&i| v.get(i))
                    .count()
                    % 2
                    == 0
            });
            assert_eq!(rowwise, c.is_codeword(&v));
        }
    }

    #[test]
    fn factor_graph_shape() {
        let g = fig35().factor_graph();
        assert_eq!(g.check_nodes, 3);
        assert_eq!(g.variable_nodes, 7);
        assert_eq!(g.edges.len(), 12);

        let diag = LinearCode::from_parity_check(BitMatrix::identity(4)).unwrap();
        assert_eq!(diag.factor_graph().edges.len(), 4);

        let star = spc3().factor_graph();
        assert_eq!(star.check_nodes, 1);
        assert_eq!(star.edges.len(), 3);
    }

    fn identity_perms(code: &LinearCode, m: usize) -> Vec<Vec<usize>> {
        vec![(0..m).collect(); code.factor_graph().edges.len()]
    }

    #[test]
    fn one_cover_is_isomorphic_copy() {
        let c = fig35();
        let cover = c.build_cover(1, &identity_perms(&c, 1)).unwrap();
        assert_eq!(cover.parity_check(), c.parity_check());
    }

    #[test]
    fn identity_two_cover_is_disjoint_union() {
        let c = fig35();
        let cover = c.build_cover(2, &identity_perms(&c, 2)).unwrap();
        assert_eq!(cover.block_len(), 14);
        assert_eq!(cover.info_len(), 8);
        // Codewords of the disjoint union are pairs of base codewords:
        // interleave two arbitrary base words and check membership.
        let words = c.codewords().unwrap();
        for a in words.iter().take(4) {
            for b in words.iter().take(4) {
                let mut pair = BitVec::zeros(14);
                for i in 0..7 {
                    pair.set(2 * i, a.get(i));
                    pair.set(2 * i + 1, b.get(i));
                }
                assert!(cover.is_codeword(&pair));
            }
        }
    }

    #[test]
    fn three_cover_dimensions() {
        let c = fig35();
        let graph_edges = c.factor_graph().edges.len();
        let perms: Vec<Vec<usize>> = (0..graph_edges).map(|e| match e % 3 {
            0 => vec![0, 1, 2],
            1 => vec![1, 2, 0],
            _ => vec![2, 0, 1],
        })
        .collect();
        let cover = c.build_cover(3, &perms).unwrap();
        assert_eq!(cover.block_len(), 21);
        assert_eq!(cover.num_checks(), 9);
        // Copy degrees match base degrees.
        for j in 0..3 {
            for t in 0..3 {
                assert_eq!(
                    cover.check_support(3 * j + t).len(),
                    c.check_support(j).len()
                );
            }
        }
    }

    #[test]
    fn cover_permutation_validation() {
        let c = rep2();
        assert!(matches!(
            c.build_cover(2, &[vec![0, 1]]),
            Err(CodeError::PermutationMismatch(_))
        ));
        assert!(matches!(
            c.build_cover(2, &[vec![0, 0], vec![0, 1]]),
            Err(CodeError::PermutationMismatch(_))
        ));
    }

    #[test]
    fn scaled_pseudocodeword_basics() {
        let c = fig35();
        let cover = c.build_cover(2, &identity_perms(&c, 2)).unwrap();
        // All-zero cover word maps to the origin.
        let zero = cover
            .scaled_pseudocodeword(&BitVec::zeros(14), 2)
            .unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        // Duplicating a base codeword across both copies averages back to it.
        let word = &c.codewords().unwrap()[5];
        let mut doubled = BitVec::zeros(14);
        for i in 0..7 {
            doubled.set(2 * i, word.get(i));
            doubled.set(2 * i + 1, word.get(i));
        }
        let avg = cover.scaled_pseudocodeword(&doubled, 2).unwrap();
        for i in 0..7 {
            assert_eq!(avg[i], if word.get(i) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn scaled_pseudocodeword_rejects_non_member() {
        let c = fig35();
        let cover = c.build_cover(2, &identity_perms(&c, 2)).unwrap();
        let mut bad = BitVec::zeros(14);
        bad.set(0, true);
        assert!(matches!(
            cover.scaled_pseudocodeword(&bad, 2),
            Err(CodeError::NotCoverCodeword)
        ));
    }
}
