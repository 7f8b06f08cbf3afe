//! Zero-fill incomplete LU factorization on the sparsity pattern of the
//! source matrix, with the unit-lower-diagonal convention.

use super::{SparseError, SparseMatrixCsr};

/// Combined L\U values stored on exactly the pattern of the factored matrix.
/// The lower part holds the multipliers of a unit-lower-triangular L, the
/// upper part (including the diagonal) holds U.
#[derive(Debug, Clone)]
pub struct Ilu0Factors {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    luval: Vec<f64>,
    diag_pos: Vec<usize>,
}

/// Standard IKJ zero-fill factorization. Requires a square matrix with all
/// diagonal entries present in the pattern. A pivot is rejected when its
/// magnitude falls below `1e-14` times the largest diagonal magnitude of the
/// source matrix.
pub fn ilu0_factor(a: &SparseMatrixCsr) -> Result<Ilu0Factors, SparseError> {
    if a.nrows() != a.ncols() {
        return Err(SparseError::DimensionMismatch(
            "ilu0: matrix must be square".into(),
        ));
    }
    let n = a.nrows();
    let row_offsets = a.row_offsets().to_vec();
    let col_indices = a.col_indices().to_vec();
    let mut luval = a.values().to_vec();

    let mut diag_pos = vec![usize::MAX; n];
    let mut max_diag = 0.0f64;
    for i in 0..n {
        for k in row_offsets[i]..row_offsets[i + 1] {
            if col_indices[k] == i {
                diag_pos[i] = k;
                max_diag = max_diag.max(luval[k].abs());
            }
        }
        if diag_pos[i] == usize::MAX {
            return Err(SparseError::InvalidStructure(format!(
                "ilu0: missing diagonal entry in row {i}"
            )));
        }
    }
    let tol = 1e-14 * max_diag.max(f64::MIN_POSITIVE);

    // pos[j] points at the slot of column j within the current row.
    let mut pos = vec![usize::MAX; n];
    for i in 0..n {
        let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
        for k in lo..hi {
            pos[col_indices[k]] = k;
        }
        // Columns are sorted, so the k-loop visits k < i in increasing order.
        for kk in lo..hi {
            let k = col_indices[kk];
            if k >= i {
                break;
            }
            let pivot = luval[diag_pos[k]];
            if pivot.abs() <= tol {
                for k2 in lo..hi {
                    pos[col_indices[k2]] = usize::MAX;
                }
                return Err(SparseError::ZeroPivot { row: k });
            }
            let lik = luval[kk] / pivot;
            luval[kk] = lik;
            for k2 in (diag_pos[k] + 1)..row_offsets[k + 1] {
                let j = col_indices[k2];
                let p = pos[j];
                if p != usize::MAX {
                    luval[p] -= lik * luval[k2];
                }
            }
        }
        if luval[diag_pos[i]].abs() <= tol {
            return Err(SparseError::ZeroPivot { row: i });
        }
        for k in lo..hi {
            pos[col_indices[k]] = usize::MAX;
        }
    }
    Ok(Ilu0Factors {
        n,
        row_offsets,
        col_indices,
        luval,
        diag_pos,
    })
}

impl Ilu0Factors {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Solves L U x = r by forward and backward substitution.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let mut x = r.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n, "ilu0 solve: dimension mismatch");
        for i in 0..self.n {
            let mut acc = x[i];
            for k in self.row_offsets[i]..self.diag_pos[i] {
                acc -= self.luval[k] * x[self.col_indices[k]];
            }
            x[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for k in (self.diag_pos[i] + 1)..self.row_offsets[i + 1] {
                acc -= self.luval[k] * x[self.col_indices[k]];
            }
            x[i] = acc / self.luval[self.diag_pos[i]];
        }
    }

    /// Reassembles L*U as a dense matrix (test support; L has unit diagonal).
    pub fn product_dense(&self) -> super::DenseMatrix {
        let n = self.n;
        let mut l = super::DenseMatrix::identity(n);
        let mut u = super::DenseMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                if j < i {
                    l.set(i, j, self.luval[k]);
                } else {
                    u.set(i, j, self.luval[k]);
                }
            }
        }
        l.matmul(&u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{DenseLu, DenseMatrix};

    fn tridiag(n: usize, lo: f64, d: f64, up: f64) -> SparseMatrixCsr {
        let mut t = Vec::new();
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, lo));
            }
            t.push((i, i, d));
            if i + 1 < n {
                t.push((i, i + 1, up));
            }
        }
        SparseMatrixCsr::from_triplets(n, n, &t).unwrap()
    }

    fn laplace_5pt(nx: usize) -> SparseMatrixCsr {
        let n = nx * nx;
        let idx = |i: usize, j: usize| i * nx + j;
        let mut t = Vec::new();
        for i in 0..nx {
            for j in 0..nx {
                let r = idx(i, j);
                t.push((r, r, 4.0));
                if i > 0 {
                    t.push((r, idx(i - 1, j), -1.0));
                }
                if i + 1 < nx {
                    t.push((r, idx(i + 1, j), -1.0));
                }
                if j > 0 {
                    t.push((r, idx(i, j - 1), -1.0));
                }
                if j + 1 < nx {
                    t.push((r, idx(i, j + 1), -1.0));
                }
            }
        }
        SparseMatrixCsr::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn diagonal_matrix_trivial_factors() {
        let a = SparseMatrixCsr::from_triplets(3, 3, &[(0, 0, 2.0), (1, 1, 3.0), (2, 2, 4.0)])
            .unwrap();
        let f = ilu0_factor(&a).unwrap();
        let p = f.product_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert!((p.get(i, j) - a.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tridiagonal_equals_exact_lu() {
        // Tridiagonal has no fill, so ILU(0) is the exact factorization.
        let a = tridiag(3, -1.0, 4.0, -1.0);
        let f = ilu0_factor(&a).unwrap();
        let rhs = vec![3.0, 2.0, 3.0];
        let x = f.solve(&rhs);
        let dense = DenseLu::factor(&DenseMatrix::from_csr(&a)).unwrap();
        let xd = dense.solve(&rhs);
        for (a, b) in x.iter().zip(&xd) {
            assert!((a - b).abs() <= 1e-12);
        }
        let p = f.product_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert!((p.get(i, j) - a.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn laplacian_residual_vanishes_on_pattern() {
        let a = laplace_5pt(8);
        let f = ilu0_factor(&a).unwrap();
        let p = f.product_dense();
        let n = a.nrows();
        let mut off_pattern_max = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let r = p.get(i, j) - a.get(i, j);
                if a.row_cols(i).binary_search(&j).is_ok() {
                    assert!(r.abs() <= 1e-12, "residual {r} on pattern at ({i},{j})");
                } else {
                    off_pattern_max = off_pattern_max.max(r.abs());
                }
            }
        }
        assert!(
            off_pattern_max > 1e-8,
            "expected nonzero off-pattern residual, got {off_pattern_max}"
        );
    }

    #[test]
    fn apply_identity() {
        let f = ilu0_factor(&SparseMatrixCsr::identity(2)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn apply_diagonal() {
        let a =
            SparseMatrixCsr::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 4.0)]).unwrap();
        let f = ilu0_factor(&a).unwrap();
        let x = f.solve(&[2.0, 4.0]);
        assert!((x[0] - 1.0).abs() < 1e-15);
        assert!((x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_pivot_reported() {
        let a = SparseMatrixCsr::from_triplets(
            2,
            2,
            &[(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)],
        )
        .unwrap();
        match ilu0_factor(&a) {
            Err(SparseError::ZeroPivot { row }) => assert_eq!(row, 0),
            other => panic!("expected zero pivot, got {other:?}"),
        }
    }

    #[test]
    fn missing_diagonal_rejected() {
        let a = SparseMatrixCsr::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(matches!(
            ilu0_factor(&a),
            Err(SparseError::InvalidStructure(_))
        ));
    }
}
