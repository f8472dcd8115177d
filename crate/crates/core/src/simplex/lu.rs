//! Minimal dense LU factorization with partial pivoting, sized for the
//! basis matrices of a desk-scale simplex solver. Supports solving with the
//! factored matrix and with its transpose, which is all the simplex
//! iterations need.

#[derive(Debug)]
pub(crate) struct Singular;

pub(crate) struct LuFactors {
    n: usize,
    /// Combined L (strict lower, unit diagonal) and U (upper) in one matrix.
    lu: Vec<f64>,
    /// Row permutation: row `i` of the factored matrix is row `perm[i]` of
    /// the original.
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factor a dense `n x n` matrix given in row-major order.
    pub fn factor(a: &[f64], n: usize) -> Result<Self, Singular> {
        debug_assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut best = col;
            let mut best_abs = lu[col * n + col].abs();
            for row in col + 1..n {
                let v = lu[row * n + col].abs();
                if v > best_abs {
                    best = row;
                    best_abs = v;
                }
            }
            if best_abs < 1e-12 {
                return Err(Singular);
            }
            if best != col {
                perm.swap(col, best);
                for j in 0..n {
                    lu.swap(col * n + j, best * n + j);
                }
            }
            let pivot = lu[col * n + col];
            for row in col + 1..n {
                let factor = lu[row * n + col] / pivot;
                lu[row * n + col] = factor;
                if factor != 0.0 {
                    for j in col + 1..n {
                        lu[row * n + j] -= factor * lu[col * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    /// Solve `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        // A = P^T L U, so A^T x = U^T L^T P x = b: forward-solve with U^T,
        // back-solve with L^T, then undo the permutation.
        let mut z = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                z[i] -= self.lu[j * n + i] * z[j];
            }
            z[i] /= self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                z[i] -= self.lu[j * n + i] * z[j];
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = z[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
            .collect()
    }

    #[test]
    fn solves_small_system() {
        let a = [2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let lu = LuFactors::factor(&a, 3).unwrap();
        let b = [8.0, -11.0, -3.0];
        let x = lu.solve(&b);
        let back = mat_vec(&a, 3, &x);
        for (got, want) in back.iter().zip(&b) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn solves_transposed_system() {
        let a = [4.0, 3.0, 0.0, 6.0, 3.0, 1.0, 0.0, 7.0, 9.0];
        let lu = LuFactors::factor(&a, 3).unwrap();
        let b = [1.0, -2.0, 3.0];
        let x = lu.solve_transpose(&b);
        // Multiply by A^T directly.
        let back: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[j * 3 + i] * x[j]).sum())
            .collect();
        for (got, want) in back.iter().zip(&b) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_singular() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(LuFactors::factor(&a, 2).is_err());
    }

    #[test]
    fn empty_system() {
        let lu = LuFactors::factor(&[], 0).unwrap();
        assert!(lu.solve(&[]).is_empty());
        assert!(lu.solve_transpose(&[]).is_empty());
    }
}
