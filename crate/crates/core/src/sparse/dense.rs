//! Row-major dense matrices and LU with partial pivoting. These back the
//! per-element local solvers and serve as oracles for the sparse kernels.

use super::{SparseError, SparseMatrixCsr};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_values(nrows: usize, ncols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), nrows * ncols);
        Self {
            nrows,
            ncols,
            values,
        }
    }

    /// Densifies a CSR matrix (test and oracle use).
    pub fn from_csr(a: &SparseMatrixCsr) -> Self {
        let mut m = Self::zeros(a.nrows(), a.ncols());
        for (i, j, v) in a.to_triplets() {
            m.values[i * a.ncols() + j] += v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.ncols + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.ncols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t.values[j * self.nrows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut c = DenseMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                let crow = c.row_mut(i);
                for (cv, bv) in crow.iter_mut().zip(brow) {
                    *cv += a * bv;
                }
            }
        }
        c
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// LU factorization of a dense square matrix with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    ipiv: Vec<usize>,
}

impl DenseLu {
    /// Factors `a` in a copy. Fails when a pivot falls below
    /// `1e-14 * max|a|`.
    pub fn factor(a: &DenseMatrix) -> Result<Self, SparseError> {
        assert_eq!(a.nrows, a.ncols, "dense LU: square only");
        let n = a.nrows;
        let mut lu = a.clone();
        let mut ipiv = Vec::with_capacity(n);
        let tol = 1e-14 * a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut piv = k;
            let mut pmax = lu.get(k, k).abs();
            for i in (k + 1)..n {
                let v = lu.get(i, k).abs();
                if v > pmax {
                    pmax = v;
                    piv = i;
                }
            }
            if pmax <= tol {
                return Err(SparseError::Singular {
                    step: k,
                    pivot: pmax,
                });
            }
            if piv != k {
                for j in 0..n {
                    let t = lu.get(k, j);
                    lu.set(k, j, lu.get(piv, j));
                    lu.set(piv, j, t);
                }
            }
            ipiv.push(piv);
            let pivot = lu.get(k, k);
            for i in (k + 1)..n {
                let l = lu.get(i, k) / pivot;
                lu.set(i, k, l);
                if l == 0.0 {
                    continue;
                }
                // Split borrow so row k can be read while row i is updated.
                let (upper, lower) = lu.values.split_at_mut((k + 1) * n);
                let rowk = &upper[k * n..(k + 1) * n];
                let rowi = &mut lower[(i - k - 1) * n..(i - k) * n];
                for j in (k + 1)..n {
                    rowi[j] -= l * rowk[j];
                }
            }
        }
        Ok(Self { lu, ipiv })
    }

    pub fn order(&self) -> usize {
        self.lu.nrows
    }

    /// Solves A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.order();
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.ipiv[k]);
        }
        for i in 1..n {
            let mut acc = b[i];
            let row = self.lu.row(i);
            for (j, bj) in b[..i].iter().enumerate() {
                acc -= row[j] * bj;
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = b[i];
            for j in (i + 1)..n {
                acc -= row[j] * b[j];
            }
            b[i] = acc / row[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves A X = B for a dense right-hand-side block, column blocked for
    /// cache friendliness (B is row-major, so whole rows are updated at once).
    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        let n = self.order();
        assert_eq!(b.nrows, n);
        let m = b.ncols;
        let mut x = b.clone();
        for k in 0..n {
            if self.ipiv[k] != k {
                let (a, bpos) = (k, self.ipiv[k]);
                for j in 0..m {
                    let t = x.get(a, j);
                    x.set(a, j, x.get(bpos, j));
                    x.set(bpos, j, t);
                }
            }
        }
        for i in 1..n {
            let row = self.lu.row(i);
            for j in 0..i {
                let l = row[j];
                if l == 0.0 {
                    continue;
                }
                let (done, rest) = x.values.split_at_mut(i * m);
                let xj = &done[j * m..(j + 1) * m];
                let xi = &mut rest[..m];
                for c in 0..m {
                    xi[c] -= l * xj[c];
                }
            }
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            for j in (i + 1)..n {
                let u = row[j];
                if u == 0.0 {
                    continue;
                }
                let (head, tail) = x.values.split_at_mut(j * m);
                let xi = &mut head[i * m..(i + 1) * m];
                let xj = &tail[..m];
                for c in 0..m {
                    xi[c] -= u * xj[c];
                }
            }
            let d = row[i];
            for c in 0..m {
                x.values[i * m + c] /= d;
            }
        }
        x
    }
}

/// Solves A X = B with dense partial-pivoted LU.
pub fn dense_lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, SparseError> {
    let lu = DenseLu::factor(a)?;
    Ok(lu.solve_mat(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_solve_returns_rhs() {
        let a = DenseMatrix::identity(3);
        let b = DenseMatrix::from_values(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let x = dense_lu_solve(&a, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_inverse() {
        let a = DenseMatrix::from_values(2, 2, vec![2.0, 0.0, 0.0, 4.0]);
        let x = dense_lu_solve(&a, &DenseMatrix::identity(2)).unwrap();
        assert!((x.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((x.get(1, 1) - 0.25).abs() < 1e-15);
        assert_eq!(x.get(0, 1), 0.0);
        assert_eq!(x.get(1, 0), 0.0);
    }

    #[test]
    fn random_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 20;
        let a = DenseMatrix::from_values(
            n,
            n,
            (0..n * n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
        );
        let b = DenseMatrix::from_values(
            n,
            3,
            (0..n * 3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
        );
        let x = dense_lu_solve(&a, &b).unwrap();
        let r = a.matmul(&x);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..n {
            for j in 0..3 {
                num += (r.get(i, j) - b.get(i, j)).powi(2);
                den += b.get(i, j).powi(2);
            }
        }
        assert!(num.sqrt() / den.sqrt() <= 1e-11);
    }

    #[test]
    fn singular_rejected() {
        let a = DenseMatrix::from_values(2, 2, vec![1.0, 1.0, 1.0, 1.0]);
        assert!(DenseLu::factor(&a).is_err());
    }

    #[test]
    fn solve_vec_matches_solve_mat() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 9;
        let a = DenseMatrix::from_values(
            n,
            n,
            (0..n * n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
        );
        let b: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let lu = DenseLu::factor(&a).unwrap();
        let x1 = lu.solve(&b);
        let bm = DenseMatrix::from_values(n, 1, b.clone());
        let x2 = lu.solve_mat(&bm);
        for i in 0..n {
            assert!((x1[i] - x2.get(i, 0)).abs() < 1e-14);
        }
    }
}
