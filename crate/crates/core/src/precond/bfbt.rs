//! Least-squares commutator (BFBT) approximation of the inverse Schur
//! complement: S~^-1 = (B B^T)^-1 B F B^T (B B^T)^-1.

use super::PrecondError;
use crate::sparse::{sparse_lu_factor, SparseLuFactors, SparseMatrixCsr};

/// Handling of the constant nullspace of B B^T that appears under fully
/// periodic or enclosed velocity boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullspacePolicy {
    /// Detect the constant nullspace and pin the first pressure unknown.
    Auto,
    /// Pin the given unknown unconditionally.
    Pin(usize),
    /// Fail on a singular normal matrix.
    Reject,
}

/// BFBT Schur-complement approximation. The normal matrix B B^T is
/// element-count by element-count and is factorized once with sparse LU.
pub struct BfbtSchur {
    b: SparseMatrixCsr,
    bt: SparseMatrixCsr,
    f: SparseMatrixCsr,
    bbt_lu: SparseLuFactors,
    pinned: Option<usize>,
}

impl BfbtSchur {
    pub fn new(
        b: &SparseMatrixCsr,
        f: &SparseMatrixCsr,
        policy: NullspacePolicy,
    ) -> Result<Self, PrecondError> {
        if b.ncols() != f.nrows() || f.nrows() != f.ncols() {
            return Err(PrecondError::DimensionMismatch(format!(
                "B is {}x{}, F is {}x{}",
                b.nrows(),
                b.ncols(),
                f.nrows(),
                f.ncols()
            )));
        }
        let bt = b.transpose();
        let bbt = b.matmul(&bt)?;
        let pin = match policy {
            NullspacePolicy::Pin(i) => Some(i),
            NullspacePolicy::Reject => None,
            NullspacePolicy::Auto => {
                if has_constant_nullspace(&bbt) {
                    Some(0)
                } else {
                    None
                }
            }
        };
        let factored = match pin {
            Some(i) => pin_unknown(&bbt, i)?,
            None => bbt,
        };
        let bbt_lu = match sparse_lu_factor(&factored) {
            Ok(lu) => lu,
            Err(crate::sparse::SparseError::Singular { .. })
                if policy == NullspacePolicy::Reject =>
            {
                return Err(PrecondError::SingularNormalMatrix)
            }
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            b: b.clone(),
            bt,
            f: f.clone(),
            bbt_lu,
            pinned: pin,
        })
    }

    pub fn n_p(&self) -> usize {
        self.b.nrows()
    }

    /// Index of the pinned pressure unknown, when the constant nullspace was
    /// removed.
    pub fn pinned(&self) -> Option<usize> {
        self.pinned
    }

    /// Applies (B B^T)^-1 B F B^T (B B^T)^-1 to `r`, evaluated right to left
    /// with two sparse solves and three products.
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.n_p(), "bfbt: dimension mismatch");
        let t1 = self.bbt_lu.solve(r);
        let t2 = self.bt.spmv(&t1).expect("bfbt: B^T product");
        let t3 = self.f.spmv(&t2).expect("bfbt: F product");
        let t4 = self.b.spmv(&t3).expect("bfbt: B product");
        self.bbt_lu.solve(&t4)
    }
}

fn has_constant_nullspace(bbt: &SparseMatrixCsr) -> bool {
    let ones = vec![1.0; bbt.ncols()];
    let prod = bbt.spmv(&ones).expect("square product");
    let scale = bbt.max_abs().max(f64::MIN_POSITIVE);
    prod.iter().all(|v| v.abs() <= 1e-10 * scale)
}

/// Replaces row and column `i` by the identity.
fn pin_unknown(a: &SparseMatrixCsr, i: usize) -> Result<SparseMatrixCsr, PrecondError> {
    let mut t: Vec<(usize, usize, f64)> = a
        .to_triplets()
        .into_iter()
        .filter(|&(r, c, _)| r != i && c != i)
        .collect();
    t.push((i, i, 1.0));
    Ok(SparseMatrixCsr::from_triplets(a.nrows(), a.ncols(), &t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{dense_lu_solve, DenseMatrix};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dense_bfbt_oracle(b: &DenseMatrix, f: &DenseMatrix, r: &[f64]) -> Vec<f64> {
        let bt = b.transpose();
        let bbt = b.matmul(&bt);
        let rm = DenseMatrix::from_values(r.len(), 1, r.to_vec());
        let t1 = dense_lu_solve(&bbt, &rm).unwrap();
        let t2 = bt.matvec(&(0..r.len()).map(|i| t1.get(i, 0)).collect::<Vec<_>>());
        let t3 = f.matvec(&t2);
        let t4 = b.matvec(&t3);
        let t4m = DenseMatrix::from_values(r.len(), 1, t4);
        let out = dense_lu_solve(&bbt, &t4m).unwrap();
        (0..r.len()).map(|i| out.get(i, 0)).collect()
    }

    #[test]
    fn identity_b_scaled_f() {
        // B = I, F = 2I: every factor commutes and the action is 2r.
        let b = SparseMatrixCsr::identity(4);
        let f = SparseMatrixCsr::from_triplets(
            4,
            4,
            &(0..4).map(|i| (i, i, 2.0)).collect::<Vec<_>>(),
        )
        .unwrap();
        let s = BfbtSchur::new(&b, &f, NullspacePolicy::Reject).unwrap();
        let r = vec![1.0, -2.0, 3.0, 0.25];
        let y = s.apply(&r);
        for (yi, ri) in y.iter().zip(&r) {
            assert!((yi - 2.0 * ri).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_commutator_case_matches_true_schur_inverse() {
        // F = alpha I commutes exactly, so BFBT equals (B F^-1 B^T)^-1.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for &alpha in &[0.5, 2.0, 10.0] {
            let (np, nu) = (3, 8);
            let mut bt_ = Vec::new();
            for i in 0..np {
                for j in 0..nu {
                    bt_.push((i, j, rng.gen::<f64>() * 2.0 - 1.0));
                }
            }
            let b = SparseMatrixCsr::from_triplets(np, nu, &bt_).unwrap();
            let f = SparseMatrixCsr::from_triplets(
                nu,
                nu,
                &(0..nu).map(|i| (i, i, alpha)).collect::<Vec<_>>(),
            )
            .unwrap();
            let s = BfbtSchur::new(&b, &f, NullspacePolicy::Reject).unwrap();
            let r: Vec<f64> = (0..np).map(|_| rng.gen::<f64>() - 0.5).collect();
            let y = s.apply(&r);
            // Dense exact Schur: S = B F^-1 B^T = (1/alpha) B B^T.
            let bd = DenseMatrix::from_csr(&b);
            let bbt = bd.matmul(&bd.transpose());
            let mut sd = DenseMatrix::zeros(np, np);
            for i in 0..np {
                for j in 0..np {
                    sd.set(i, j, bbt.get(i, j) / alpha);
                }
            }
            let rm = DenseMatrix::from_values(np, 1, r.clone());
            let exact = dense_lu_solve(&sd, &rm).unwrap();
            for i in 0..np {
                assert!(
                    (y[i] - exact.get(i, 0)).abs() <= 1e-10 * exact.max_abs().max(1.0),
                    "alpha={alpha}"
                );
            }
        }
    }

    #[test]
    fn random_spd_f_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (np, nu) = (3, 8);
        let mut bt_ = Vec::new();
        for i in 0..np {
            for j in 0..nu {
                bt_.push((i, j, rng.gen::<f64>() * 2.0 - 1.0));
            }
        }
        let b = SparseMatrixCsr::from_triplets(np, nu, &bt_).unwrap();
        // SPD F = M^T M + nu I
        let m = DenseMatrix::from_values(
            nu,
            nu,
            (0..nu * nu).map(|_| rng.gen::<f64>() - 0.5).collect(),
        );
        let mut fd = m.transpose().matmul(&m);
        for i in 0..nu {
            fd.add(i, i, nu as f64);
        }
        let mut ft = Vec::new();
        for i in 0..nu {
            for j in 0..nu {
                ft.push((i, j, fd.get(i, j)));
            }
        }
        let f = SparseMatrixCsr::from_triplets(nu, nu, &ft).unwrap();
        let s = BfbtSchur::new(&b, &f, NullspacePolicy::Reject).unwrap();
        let r: Vec<f64> = (0..np).map(|_| rng.gen::<f64>() - 0.5).collect();
        let y = s.apply(&r);
        let yd = dense_bfbt_oracle(&DenseMatrix::from_csr(&b), &fd, &r);
        for i in 0..np {
            assert!((y[i] - yd[i]).abs() <= 1e-10 * yd[i].abs().max(1.0));
        }
    }

    #[test]
    fn constant_nullspace_detected_and_pinned() {
        // Rows of B sum to zero columnwise: B = [1 -1; -1 1] has B B^T with
        // the constant nullspace.
        let b = SparseMatrixCsr::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)],
        )
        .unwrap();
        let f = SparseMatrixCsr::identity(2);
        let s = BfbtSchur::new(&b, &f, NullspacePolicy::Auto).unwrap();
        assert_eq!(s.pinned(), Some(0));
        let _ = s.apply(&[1.0, -1.0]);
        assert!(matches!(
            BfbtSchur::new(&b, &f, NullspacePolicy::Reject),
            Err(PrecondError::SingularNormalMatrix)
        ));
    }

    #[test]
    fn normal_equations_identity() {
        // The least-squares commutator F~ = (BB^T)^-1 B F B^T satisfies
        // BB^T F~ = B F B^T entrywise.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (np, nu) = (4, 9);
        let bd = DenseMatrix::from_values(
            np,
            nu,
            (0..np * nu).map(|_| rng.gen::<f64>() - 0.5).collect(),
        );
        let fd = DenseMatrix::from_values(
            nu,
            nu,
            (0..nu * nu).map(|_| rng.gen::<f64>() - 0.5).collect(),
        );
        let bbt = bd.matmul(&bd.transpose());
        let bfbt = bd.matmul(&fd).matmul(&bd.transpose());
        let ftilde = dense_lu_solve(&bbt, &bfbt).unwrap();
        let lhs = bbt.matmul(&ftilde);
        for i in 0..np {
            for j in 0..np {
                assert!((lhs.get(i, j) - bfbt.get(i, j)).abs() <= 1e-10 * bfbt.max_abs());
            }
        }
    }
}
