//! Exact linear algebra over the binary field: packed bit vectors and
//! matrices, Gaussian pivots, reduced row echelon form, rank and nullspace.

use std::fmt;

use thiserror::Error;

const WORD_BITS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("cannot pivot on zero entry at ({row}, {col})")]
    PivotOnZero { row: usize, col: usize },
    #[error("column order is not a permutation of 0..{cols}")]
    BadColumnOrder { cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// A vector over GF(2), packed 64 bits per word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Build from 0/1 integers; anything nonzero counts as 1.
    pub fn from_ints(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of unequal-length vectors");
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of the 1-entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    /// Dot product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            write!(f, "{}", if b { 1 } else { 0 })?;
        }
        Ok(())
    }
}

/// A matrix over GF(2) with rows packed into machine words.
///
/// Operations return new matrices; values are immutable from the caller's
/// perspective and safe to share across threads.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

/// Output of [`BitMatrix::row_echelon`]: the reduced form together with the
/// rank and the pivot columns in ascending order.
#[derive(Clone, Debug)]
pub struct EchelonForm {
    pub matrix: BitMatrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, Gf2Error> {
        if rows == 0 || cols == 0 {
            return Err(Gf2Error::EmptyMatrix);
        }
        let words_per_row = cols.div_ceil(WORD_BITS);
        Ok(Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n).expect("identity of size 0");
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from rows of 0/1 integers. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, Gf2Error> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Gf2Error::EmptyMatrix);
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Gf2Error::DimensionMismatch(
                "rows have differing lengths".into(),
            ));
        }
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn from_bit_rows(rows: &[BitVec]) -> Result<Self, Gf2Error> {
        if rows.is_empty() || rows[0].len() == 0 {
            return Err(Gf2Error::EmptyMatrix);
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Gf2Error::DimensionMismatch(
                "rows have differing lengths".into(),
            ));
        }
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            for j in row.support() {
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        self.data[i * self.words_per_row + j / WORD_BITS] >> (j % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols);
        let mask = 1u64 << (j % WORD_BITS);
        let w = &mut self.data[i * self.words_per_row + j / WORD_BITS];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row(&self, i: usize) -> BitVec {
        assert!(i < self.rows);
        let start = i * self.words_per_row;
        BitVec {
            len: self.cols,
            words: self.data[start..start + self.words_per_row].to_vec(),
        }
    }

    /// Indices of the 1-entries in row `i`, ascending.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        (0..self.cols).filter(|&j| self.get(i, j)).collect()
    }

    /// Number of 1-entries in the whole matrix.
    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words_per_row;
        let (a, b) = (src * w, dst * w);
        for k in 0..w {
            let v = self.data[a + k];
            self.data[b + k] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words_per_row;
        for k in 0..w {
            self.data.swap(a * w + k, b * w + k);
        }
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        let mut out = BitVec::zeros(self.rows);
        for i in 0..self.rows {
            out.set(i, self.row(i).dot(v));
        }
        out
    }

    /// Gaussian pivot on entry `(i, j)`: XOR row `i` into every other row
    /// that has a 1 in column `j`, turning column `j` into the `i`-th unit
    /// vector. The row space is unchanged.
    pub fn gaussian_pivot(&self, i: usize, j: usize) -> Result<BitMatrix, Gf2Error> {
        assert!(i < self.rows && j < self.cols);
        if !self.get(i, j) {
            return Err(Gf2Error::PivotOnZero { row: i, col: j });
        }
        let mut m = self.clone();
        for r in 0..m.rows {
            if r != i && m.get(r, j) {
                m.xor_row_into(i, r);
            }
        }
        Ok(m)
    }

    /// Reduced row echelon form (Gauss-Jordan). Pivots are chosen as the
    /// first 1 in the leftmost unprocessed column, scanning top-down, so the
    /// output is deterministic.
    pub fn row_echelon(&self) -> EchelonForm {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for j in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, j)) else {
                continue;
            };
            m.swap_rows(r, p);
            for i in 0..m.rows {
                if i != r && m.get(i, j) {
                    m.xor_row_into(r, i);
                }
            }
            pivot_cols.push(j);
            r += 1;
        }
        EchelonForm {
            rank: pivot_cols.len(),
            pivot_cols,
            matrix: m,
        }
    }

    pub fn rank(&self) -> usize {
        self.row_echelon().rank
    }

    /// Basis of `{x : Mx = 0}`. The basis vectors are GF(2)-independent and
    /// their count equals `cols - rank`.
    pub fn nullspace(&self) -> Vec<BitVec> {
        let ech = self.row_echelon();
        let mut is_pivot = vec![false; self.cols];
        for &c in &ech.pivot_cols {
            is_pivot[c] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - ech.rank);
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(f, true);
            for (r, &p) in ech.pivot_cols.iter().enumerate() {
                if ech.matrix.get(r, f) {
                    v.set(p, true);
                }
            }
            debug_assert!(self.mul_vec(&v).is_zero());
            basis.push(v);
        }
        basis
    }

    /// Gauss-Jordan elimination relative to a column ordering: the result has
    /// the same row space as `self`, and after permuting its columns by
    /// `col_order` the leading `rank` columns are distinct unit vectors (as
    /// far as the rank permits). The result is returned in the original
    /// column order.
    pub fn diagonalize_left(&self, col_order: &[usize]) -> Result<BitMatrix, Gf2Error> {
        if col_order.len() != self.cols {
            return Err(Gf2Error::BadColumnOrder { cols: self.cols });
        }
        let mut seen = vec![false; self.cols];
        for &c in col_order {
            if c >= self.cols || seen[c] {
                return Err(Gf2Error::BadColumnOrder { cols: self.cols });
            }
            seen[c] = true;
        }
        let mut permuted = Self::zeros(self.rows, self.cols)?;
        for (jp, &j) in col_order.iter().enumerate() {
            for i in 0..self.rows {
                if self.get(i, j) {
                    permuted.set(i, jp, true);
                }
            }
        }
        let ech = permuted.row_echelon();
        // Order the pivot rows by the original index of their pivot column,
        // zero rows last, so that an already-diagonal matrix round-trips
        // unchanged for any column ordering.
        let mut row_order: Vec<usize> = (0..ech.rank).collect();
        row_order.sort_by_key(|&r| col_order[ech.pivot_cols[r]]);
        row_order.extend(ech.rank..self.rows);
        let mut out = Self::zeros(self.rows, self.cols)?;
        for (jp, &j) in col_order.iter().enumerate() {
            for (i, &src) in row_order.iter().enumerate() {
                if ech.matrix.get(src, jp) {
                    out.set(i, j, true);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "{:?}", self.row(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Parity-check matrix of the (7,4) example code used throughout the
    /// test suite.
    pub fn example_7_4() -> BitMatrix {
        BitMatrix::from_rows(&[
            vec![1, 1, 0, 1, 1, 0, 0],
            vec![0, 1, 1, 1, 0, 1, 0],
            vec![0, 0, 0, 1, 1, 1, 1],
        ])
        .unwrap()
    }

    #[test]
    fn pivot_single_xor() {
        let m = BitMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
        let p = m.gaussian_pivot(0, 0).unwrap();
        let want = BitMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn pivot_identity_unchanged() {
        let m = BitMatrix::identity(5);
        for i in 0..5 {
            assert_eq!(m.gaussian_pivot(i, i).unwrap(), m);
        }
    }

    #[test]
    fn pivot_on_unit_column_is_idempotent() {
        // Column 0 of the example matrix is already the first unit vector.
        let h = example_7_4();
        assert_eq!(h.gaussian_pivot(0, 0).unwrap(), h);
    }

    #[test]
    fn pivot_on_zero_rejected() {
        let m = BitMatrix::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(
            m.gaussian_pivot(0, 1),
            Err(Gf2Error::PivotOnZero { row: 0, col: 1 })
        );
    }

    #[test]
    fn echelon_zero_matrix() {
        let m = BitMatrix::zeros(3, 4).unwrap();
        let e = m.row_echelon();
        assert_eq!(e.rank, 0);
        assert!(e.pivot_cols.is_empty());
    }

    #[test]
    fn echelon_identity_full_rank() {
        let m = BitMatrix::identity(6);
        let e = m.row_echelon();
        assert_eq!(e.rank, 6);
        assert_eq!(e.matrix, m);
    }

    #[test]
    fn example_matrix_rank_three() {
        // Oracle: no nonzero combination of the three rows vanishes.
        let h = example_7_4();
        let rows: Vec<BitVec> = (0..3).map(|i| h.row(i)).collect();
        for mask in 1u32..8 {
            let mut acc = BitVec::zeros(7);
            for (i, row) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    acc.xor_assign(row);
                }
            }
            assert!(!acc.is_zero(), "rows dependent for mask {mask}");
        }
        assert_eq!(h.rank(), 3);
    }

    #[test]
    fn nullspace_identity_empty() {
        assert!(BitMatrix::identity(4).nullspace().is_empty());
    }

    #[test]
    fn nullspace_repetition() {
        let m = BitMatrix::from_rows(&[vec![1, 1]]).unwrap();
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], BitVec::from_ints(&[1, 1]));
    }

    #[test]
    fn nullspace_of_example_matches_exhaustive_solutions() {
        let h = example_7_4();
        let ns = h.nullspace();
        assert_eq!(ns.len(), 4);
        for v in &ns {
            assert!(h.mul_vec(v).is_zero());
        }
        // Exhaustive oracle: exactly 2^4 of the 2^7 vectors solve Hx = 0.
        let mut solutions = 0;
        for bits in 0u32..128 {
            let v = BitVec::from_bools(&(0..7).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>());
            if h.mul_vec(&v).is_zero() {
                solutions += 1;
            }
        }
        assert_eq!(solutions, 16);
    }

    #[test]
    fn diagonalize_identity_any_order() {
        let m = BitMatrix::identity(4);
        let order = [2usize, 0, 3, 1];
        assert_eq!(m.diagonalize_left(&order).unwrap(), m);
    }

    #[test]
    fn diagonalize_natural_order_leading_unit_columns() {
        let h = example_7_4();
        let order: Vec<usize> = (0..7).collect();
        let d = h.diagonalize_left(&order).unwrap();
        // Oracle: same as running plain reduced echelon form.
        assert_eq!(d, h.row_echelon().matrix);
        let e = d.row_echelon();
        assert_eq!(e.rank, 3);
    }

    #[test]
    fn diagonalize_puts_identity_on_selected_invertible_block() {
        let h = example_7_4();
        // Columns 0, 1, 3 of the example H form an invertible 3x3 block.
        let order = [0usize, 1, 3, 2, 4, 5, 6];
        let d = h.diagonalize_left(&order).unwrap();
        for (r, &c) in order[..3].iter().enumerate() {
            for i in 0..3 {
                assert_eq!(d.get(i, c), i == r, "column {c} must be unit vector {r}");
            }
        }
        // Row space is preserved: nullspaces agree as sets.
        assert_eq!(nullspace_set(&h), nullspace_set(&d));
    }

    #[test]
    fn diagonalize_rejects_non_permutation() {
        let h = example_7_4();
        assert!(h.diagonalize_left(&[0, 0, 1, 2, 3, 4, 5]).is_err());
        assert!(h.diagonalize_left(&[0, 1, 2]).is_err());
    }

    fn nullspace_set(m: &BitMatrix) -> std::collections::HashSet<Vec<bool>> {
        // Exhaustive for small column counts.
        assert!(m.cols() <= 12);
        let mut set = std::collections::HashSet::new();
        for bits in 0u64..1 << m.cols() {
            let v = BitVec::from_bools(
                &(0..m.cols()).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>(),
            );
            if m.mul_vec(&v).is_zero() {
                set.insert(v.to_bools());
            }
        }
        set
    }

    #[test]
    fn rank_plus_nullity_is_cols() {
        let cases = [
            example_7_4(),
            BitMatrix::identity(5),
            BitMatrix::zeros(2, 6).unwrap(),
            BitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap(),
        ];
        for m in cases {
            assert_eq!(m.rank() + m.nullspace().len(), m.cols());
        }
    }

    #[test]
    fn pivots_preserve_nullspace() {
        let h = example_7_4();
        let before = nullspace_set(&h);
        let mut m = h;
        // Any sequence of legal pivots keeps the solution set intact.
        for (i, j) in [(0usize, 0usize), (1, 1), (2, 3), (0, 4)] {
            if m.get(i, j) {
                m = m.gaussian_pivot(i, j).unwrap();
            }
        }
        assert_eq!(nullspace_set(&m), before);
    }
}
