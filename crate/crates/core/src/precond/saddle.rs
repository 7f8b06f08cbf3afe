//! The 2x2 regrouped form of the condensed trace system: the nodal block F
//! over the velocity trace, tangential magnetic field and Lagrange
//! multiplier, against the per-element pressure-average constraint block B.

use super::PrecondError;
use crate::amg::NodalBlockLayout;
use crate::hdg::TraceSystem;
use crate::krylov::LinearOperator;
use crate::sparse::SparseMatrixCsr;

/// A saddle system
///
/// ```text
///   [ F  -B^T ] [x_u]   [rhs_u]
///   [ B    0  ] [x_p] = [rhs_p]
/// ```
///
/// with `F` in node-blocked ordering described by `layout`. `operator` is
/// the matrix actually handed to the Krylov solver; when the system comes
/// out of static condensation it is the permuted assembled matrix, which can
/// differ from the block reassembly by local-solver roundoff.
pub struct SaddleSystem {
    pub f: SparseMatrixCsr,
    pub b: SparseMatrixCsr,
    pub bt: SparseMatrixCsr,
    pub rhs_u: Vec<f64>,
    pub rhs_p: Vec<f64>,
    pub layout: NodalBlockLayout,
    operator: SparseMatrixCsr,
    /// saddle index -> trace-system (reduced) index, when built by `split_saddle`
    perm: Option<Vec<usize>>,
}

impl SaddleSystem {
    /// Builds a saddle system directly from its blocks; the operator is the
    /// exact block reassembly.
    pub fn from_blocks(
        f: SparseMatrixCsr,
        b: SparseMatrixCsr,
        rhs_u: Vec<f64>,
        rhs_p: Vec<f64>,
        layout: NodalBlockLayout,
    ) -> Result<Self, PrecondError> {
        if f.nrows() != f.ncols() {
            return Err(PrecondError::DimensionMismatch("F must be square".into()));
        }
        if b.ncols() != f.nrows() {
            return Err(PrecondError::DimensionMismatch(format!(
                "B has {} columns, F has {} rows",
                b.ncols(),
                f.nrows()
            )));
        }
        if rhs_u.len() != f.nrows() || rhs_p.len() != b.nrows() {
            return Err(PrecondError::DimensionMismatch(
                "right-hand-side partition does not match the blocks".into(),
            ));
        }
        if layout.n_dofs() != f.nrows() {
            return Err(PrecondError::DimensionMismatch(
                "layout does not cover the F block".into(),
            ));
        }
        let bt = b.transpose();
        let operator = assemble_saddle_matrix(&f, &b, &bt)?;
        Ok(Self {
            f,
            b,
            bt,
            rhs_u,
            rhs_p,
            layout,
            operator,
            perm: None,
        })
    }

    pub fn n_u(&self) -> usize {
        self.f.nrows()
    }

    pub fn n_p(&self) -> usize {
        self.b.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_u() + self.n_p()
    }

    /// Concatenated right-hand side (u part then p part).
    pub fn rhs(&self) -> Vec<f64> {
        let mut r = Vec::with_capacity(self.dim());
        r.extend_from_slice(&self.rhs_u);
        r.extend_from_slice(&self.rhs_p);
        r
    }

    /// The matrix handed to the outer Krylov solver.
    pub fn operator(&self) -> &SparseMatrixCsr {
        &self.operator
    }

    /// Exact reassembly of [[F, -B^T], [B, 0]] from the stored blocks.
    pub fn assemble_from_blocks(&self) -> Result<SparseMatrixCsr, PrecondError> {
        assemble_saddle_matrix(&self.f, &self.b, &self.bt)
    }

    /// Maps a saddle-ordered solution vector back to the reduced
    /// trace-system ordering. Identity for directly constructed systems.
    pub fn to_trace_order(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        match &self.perm {
            None => x.to_vec(),
            Some(perm) => {
                let mut out = vec![0.0; x.len()];
                for (s, &t) in perm.iter().enumerate() {
                    out[t] = x[s];
                }
                out
            }
        }
    }

    /// Maps a reduced trace-system vector into saddle ordering.
    pub fn from_trace_order(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        match &self.perm {
            None => x.to_vec(),
            Some(perm) => perm.iter().map(|&t| x[t]).collect(),
        }
    }
}

impl LinearOperator for SaddleSystem {
    fn dim(&self) -> usize {
        self.operator.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.operator.spmv_into(x, y);
    }
}

fn assemble_saddle_matrix(
    f: &SparseMatrixCsr,
    b: &SparseMatrixCsr,
    bt: &SparseMatrixCsr,
) -> Result<SparseMatrixCsr, PrecondError> {
    let nu = f.nrows();
    let np = b.nrows();
    let mut t = Vec::with_capacity(f.nnz() + 2 * b.nnz());
    for (i, j, v) in f.to_triplets() {
        t.push((i, j, v));
    }
    for (i, j, v) in bt.to_triplets() {
        t.push((i, nu + j, -v));
    }
    for (i, j, v) in b.to_triplets() {
        t.push((nu + i, j, v));
    }
    Ok(SparseMatrixCsr::from_triplets(nu + np, nu + np, &t)?)
}

/// Regroups a condensed trace system (layout `(Uhat, rho, Bhat_t, Rhat)`)
/// into the saddle ordering `(Uhat, Bhat_t, Rhat | rho)`, with the nodal
/// block interleaved per edge node in the order (u_x, u_y, b_t, r).
///
/// The pressure-average column couples only into the velocity-trace rows
/// (as -B^T, up to local-solver roundoff); couplings into the magnetic rows
/// are pure roundoff and are checked against `1e-8 * max|A|` before being
/// dropped from the extracted blocks. The Krylov operator keeps the permuted
/// assembled matrix exactly as assembled.
pub fn split_saddle(t: &TraceSystem) -> Result<SaddleSystem, PrecondError> {
    let bc = t.bc.as_ref().ok_or_else(|| {
        PrecondError::InconsistentBlocks(
            "split_saddle requires a boundary-reduced trace system".into(),
        )
    })?;
    let n = t.matrix.nrows();
    let n_p = t.layout.n_elems;
    let n_u = n - n_p;

    // Saddle ordering: for every edge node, its free dofs in component order,
    // then the per-element pressure averages.
    let (perm, layout) = t.saddle_permutation();
    debug_assert_eq!(perm.len(), n);
    debug_assert_eq!(layout.n_dofs(), n_u);

    // perm[s] = reduced trace index of saddle dof s.
    let mut inv = vec![usize::MAX; n];
    for (s, &r) in perm.iter().enumerate() {
        inv[r] = s;
    }
    let operator = {
        let rows: Vec<usize> = perm.clone();
        let col_map: Vec<Option<usize>> = inv.iter().map(|&s| Some(s)).collect();
        t.matrix.select(&rows, &col_map, n)
    };
    let rhs: Vec<f64> = perm.iter().map(|&r| t.rhs[r]).collect();
    let rho_reduced_start = bc.rho_offset();

    // Extract blocks in saddle coordinates.
    let u_rows: Vec<usize> = (0..n_u).collect();
    let p_rows: Vec<usize> = (n_u..n).collect();
    let u_cols: Vec<Option<usize>> = (0..n)
        .map(|s| if s < n_u { Some(s) } else { None })
        .collect();
    let p_cols: Vec<Option<usize>> = (0..n)
        .map(|s| if s >= n_u { Some(s - n_u) } else { None })
        .collect();
    let f = operator.select(&u_rows, &u_cols, n_u);
    let b = operator.select(&p_rows, &u_cols, n_u);
    let minus_bt = operator.select(&u_rows, &p_cols, n_p);
    let pp = operator.select(&p_rows, &p_cols, n_p);

    // Structural checks: the (p,p) block and the skew pairing against the
    // constraint rows hold exactly up to local-solver roundoff.
    let scale = t.matrix.max_abs().max(f64::MIN_POSITIVE);
    if pp.max_abs() > 1e-8 * scale {
        return Err(PrecondError::InconsistentBlocks(format!(
            "pressure-pressure block has magnitude {:.3e}",
            pp.max_abs()
        )));
    }
    let bt = b.transpose();
    {
        let mut worst = 0.0f64;
        let mut probe = minus_bt.to_triplets();
        probe.extend(bt.to_triplets().into_iter().map(|(i, j, v)| (i, j, v)));
        let sum = SparseMatrixCsr::from_triplets(n_u, n_p, &probe)?;
        for (_, _, v) in sum.to_triplets() {
            worst = worst.max(v.abs());
        }
        if worst > 1e-8 * scale {
            return Err(PrecondError::InconsistentBlocks(format!(
                "pressure coupling deviates from -B^T by {worst:.3e}"
            )));
        }
    }
    let _ = rho_reduced_start;

    Ok(SaddleSystem {
        rhs_u: rhs[..n_u].to_vec(),
        rhs_p: rhs[n_u..].to_vec(),
        f,
        b,
        bt,
        layout,
        operator,
        perm: Some(perm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_saddle() -> SaddleSystem {
        // F = diag(2, 3), B = [1 1]
        let f = SparseMatrixCsr::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 3.0)]).unwrap();
        let b = SparseMatrixCsr::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        SaddleSystem::from_blocks(
            f,
            b,
            vec![1.0, 2.0],
            vec![0.5],
            NodalBlockLayout::scalar(2),
        )
        .unwrap()
    }

    #[test]
    fn block_assembly_signs() {
        let s = small_saddle();
        let a = s.operator();
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.get(1, 1), 3.0);
        assert_eq!(a.get(0, 2), -1.0);
        assert_eq!(a.get(1, 2), -1.0);
        assert_eq!(a.get(2, 0), 1.0);
        assert_eq!(a.get(2, 1), 1.0);
        assert_eq!(a.get(2, 2), 0.0);
    }

    #[test]
    fn apply_matches_blockwise() {
        let s = small_saddle();
        let x = vec![1.0, -1.0, 2.0];
        let mut y = vec![0.0; 3];
        s.apply(&x, &mut y);
        // y_u = F x_u - B^T x_p; y_p = B x_u
        assert_eq!(y, vec![2.0 - 2.0, -3.0 - 2.0, 0.0]);
    }

    #[test]
    fn dimension_checks() {
        let f = SparseMatrixCsr::identity(2);
        let b = SparseMatrixCsr::from_triplets(1, 3, &[(0, 0, 1.0)]).unwrap();
        assert!(SaddleSystem::from_blocks(
            f,
            b,
            vec![0.0; 2],
            vec![0.0],
            NodalBlockLayout::scalar(2)
        )
        .is_err());
    }
}
