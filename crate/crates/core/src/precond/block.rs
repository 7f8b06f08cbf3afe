//! Block upper-triangular right preconditioner
//!
//! ```text
//!   [ F~^-1   F~^-1 B^T S~^-1 ]
//!   [   0          S~^-1      ]
//! ```
//!
//! applied as y_p = S~^-1 r_p, y_u = F~^-1 (r_u + B^T y_p). With exact
//! sub-inverses the preconditioned saddle matrix has minimal polynomial of
//! degree two and GMRES converges in at most two iterations.

use super::{BfbtSchur, PrecondError, SaddleSystem};
use crate::amg::AmgHierarchy;
use crate::krylov::Preconditioner;
use crate::sparse::{DenseLu, DenseMatrix, Ilu0Factors, SparseLuFactors, SparseMatrixCsr};

/// An approximate inverse action used for either diagonal block.
pub trait InverseAction: Send + Sync {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
    fn is_variable(&self) -> bool {
        false
    }
}

impl InverseAction for AmgHierarchy {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.vcycle(r)
    }
    fn is_variable(&self) -> bool {
        !self.is_linear()
    }
}

impl InverseAction for SparseLuFactors {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.solve(r)
    }
}

impl InverseAction for BfbtSchur {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        BfbtSchur::apply(self, r)
    }
}

/// Exact dense inverse (test-scale blocks).
pub struct DenseInverse {
    lu: DenseLu,
}

impl DenseInverse {
    pub fn new(a: &DenseMatrix) -> Result<Self, PrecondError> {
        Ok(Self {
            lu: DenseLu::factor(a)?,
        })
    }
}

impl InverseAction for DenseInverse {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.lu.solve(r)
    }
}

/// Exact inverse of a matrix with the constant left/right nullspace,
/// deflated by a rank-one shift: solve (S + c 11^T) y = (I - 11^T/n) r.
/// On the mean-zero complement this is the true inverse, and the residual
/// projector it leaves behind vanishes on consistent right-hand sides.
pub struct DeflatedDenseInverse {
    lu: DenseLu,
    n: usize,
}

impl DeflatedDenseInverse {
    pub fn new(s: &DenseMatrix) -> Result<Self, PrecondError> {
        let n = s.nrows();
        let shift = s.max_abs().max(1.0) / n as f64;
        let mut shifted = s.clone();
        for i in 0..n {
            for j in 0..n {
                shifted.add(i, j, shift);
            }
        }
        Ok(Self {
            lu: DenseLu::factor(&shifted)?,
            n,
        })
    }
}

impl InverseAction for DeflatedDenseInverse {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mean = r.iter().sum::<f64>() / self.n as f64;
        let proj: Vec<f64> = r.iter().map(|v| v - mean).collect();
        self.lu.solve(&proj)
    }
}

/// Richardson iterations preconditioned by ILU(0) of the block operator.
pub struct Ilu0Richardson {
    a: SparseMatrixCsr,
    fac: Ilu0Factors,
    steps: usize,
}

impl Ilu0Richardson {
    pub fn new(a: &SparseMatrixCsr, steps: usize) -> Result<Self, PrecondError> {
        let padded = a.with_full_diagonal();
        let fac = crate::sparse::ilu0_factor(&padded)?;
        Ok(Self {
            a: padded,
            fac,
            steps: steps.max(1),
        })
    }
}

impl InverseAction for Ilu0Richardson {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = self.a.nrows();
        let mut x = vec![0.0; n];
        let mut work = vec![0.0; n];
        for step in 0..self.steps {
            if step == 0 {
                work.copy_from_slice(r);
            } else {
                self.a.spmv_into(&x, &mut work);
                for i in 0..n {
                    work[i] = r[i] - work[i];
                }
            }
            self.fac.solve_in_place(&mut work);
            for i in 0..n {
                x[i] += work[i];
            }
        }
        x
    }
}

/// The block upper-triangular right preconditioner over the saddle layout.
pub struct BlockPreconditioner {
    f_inv: Box<dyn InverseAction>,
    s_inv: Box<dyn InverseAction>,
    bt: SparseMatrixCsr,
    n_u: usize,
    n_p: usize,
}

impl BlockPreconditioner {
    pub fn new(
        f_inv: Box<dyn InverseAction>,
        s_inv: Box<dyn InverseAction>,
        bt: SparseMatrixCsr,
    ) -> Self {
        let n_u = bt.nrows();
        let n_p = bt.ncols();
        Self {
            f_inv,
            s_inv,
            bt,
            n_u,
            n_p,
        }
    }

    /// Exact-inverse preconditioner for a saddle system: sparse LU for F and
    /// a dense Schur complement, deflated when B B^T carries the constant
    /// nullspace.
    pub fn ideal(sys: &SaddleSystem) -> Result<Self, PrecondError> {
        let f_lu = crate::sparse::sparse_lu_factor(&sys.f)?;
        let s = exact_schur_dense(&f_lu, &sys.b, &sys.bt);
        let ones = vec![1.0; sys.n_p()];
        let s_ones = s.matvec(&ones);
        let singular = s_ones
            .iter()
            .all(|v| v.abs() <= 1e-10 * s.max_abs().max(f64::MIN_POSITIVE));
        let s_inv: Box<dyn InverseAction> = if singular {
            Box::new(DeflatedDenseInverse::new(&s)?)
        } else {
            Box::new(DenseInverse::new(&s)?)
        };
        Ok(Self::new(Box::new(f_lu), s_inv, sys.bt.clone()))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_u, self.n_p)
    }
}

impl Preconditioner for BlockPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        assert_eq!(r.len(), self.n_u + self.n_p, "block precond: dimension");
        let (r_u, r_p) = r.split_at(self.n_u);
        let y_p = self.s_inv.apply(r_p);
        let mut rhs_u = self.bt.spmv(&y_p).expect("B^T product");
        for (a, b) in rhs_u.iter_mut().zip(r_u) {
            *a += b;
        }
        let y_u = self.f_inv.apply(&rhs_u);
        z[..self.n_u].copy_from_slice(&y_u);
        z[self.n_u..].copy_from_slice(&y_p);
    }

    fn is_variable(&self) -> bool {
        self.f_inv.is_variable() || self.s_inv.is_variable()
    }
}

/// Dense Schur complement S = B F^-1 B^T, one F-solve per pressure unknown.
pub fn exact_schur_dense(
    f_lu: &SparseLuFactors,
    b: &SparseMatrixCsr,
    bt: &SparseMatrixCsr,
) -> DenseMatrix {
    let n_p = b.nrows();
    let n_u = b.ncols();
    let mut s = DenseMatrix::zeros(n_p, n_p);
    let mut e = vec![0.0; n_p];
    for j in 0..n_p {
        e[j] = 1.0;
        let btj = bt.spmv(&e).expect("B^T column");
        debug_assert_eq!(btj.len(), n_u);
        let x = f_lu.solve(&btj);
        let col = b.spmv(&x).expect("B product");
        for i in 0..n_p {
            s.set(i, j, col[i]);
        }
        e[j] = 0.0;
    }
    s
}
