//! Sequential sparse LU with fill-in, partial pivoting, and a
//! minimum-degree-style fill-reducing column ordering.
//!
//! The factorization is column-oriented (Gilbert–Peierls): each column is a
//! sparse triangular solve against the already-computed part of L, with the
//! reachable set found by depth-first search. Intended for desk-scale direct
//! solves (coarsest multigrid level, the pressure-block normal matrix, exact
//! sub-inverses in tests).

use super::{SparseError, SparseMatrixCsr};

/// A = P^-1 L U Q^-1 where P is the row permutation chosen by partial
/// pivoting and Q the fill-reducing column permutation.
#[derive(Debug, Clone)]
pub struct SparseLuFactors {
    l: SparseMatrixCsr,
    u: SparseMatrixCsr,
    /// row_perm[k] = original row pivoted at step k
    row_perm: Vec<usize>,
    /// col_perm[k] = original column eliminated at step k
    col_perm: Vec<usize>,
}

/// Greedy minimum-degree ordering on the symmetrized pattern of `a`.
/// Quadratic in the worst case; fine at the problem sizes this crate
/// direct-solves.
fn min_degree_order(a: &SparseMatrixCsr) -> Vec<usize> {
    use std::collections::BTreeSet;
    let n = a.nrows();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, j, _) in a.to_triplets() {
        if i != j {
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(usize, usize)>> =
        (0..n).map(|i| std::cmp::Reverse((adj[i].len(), i))).collect();
    while let Some(std::cmp::Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || adj[v].len() != deg {
            continue; // stale entry
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &nbrs {
            adj[u].remove(&v);
        }
        // Connect the neighbors into a clique (elimination graph update).
        for (k, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[k + 1..] {
                if adj[x].insert(y) {
                    adj[y].insert(x);
                }
            }
        }
        for &u in &nbrs {
            if !eliminated[u] {
                heap.push(std::cmp::Reverse((adj[u].len(), u)));
            }
        }
    }
    order
}

/// Factors a square, structurally nonsingular matrix. A pivot below
/// `1e-14 * max|A|` is reported as singular.
pub fn sparse_lu_factor(a: &SparseMatrixCsr) -> Result<SparseLuFactors, SparseError> {
    if a.nrows() != a.ncols() {
        return Err(SparseError::DimensionMismatch(
            "sparse LU: matrix must be square".into(),
        ));
    }
    let n = a.nrows();
    let tol = 1e-14 * a.max_abs().max(f64::MIN_POSITIVE);
    let col_perm = min_degree_order(a);
    let at = a.transpose(); // row k of `at` is column k of `a`

    // L columns as (original row, value); U columns as (pivot step, value).
    let mut lcols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut ucols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut pinv = vec![usize::MAX; n]; // original row -> pivot step
    let mut row_perm = vec![0usize; n];

    let mut x = vec![0.0f64; n];
    let mut visited = vec![usize::MAX; n];
    let mut topo: Vec<usize> = Vec::with_capacity(n);
    let mut dfs_stack: Vec<(usize, usize)> = Vec::new();

    for (step, &j) in col_perm.iter().enumerate() {
        // Symbolic: rows reachable from the pattern of A(:, j) through L.
        topo.clear();
        for &r0 in at.row_cols(j) {
            if visited[r0] == step {
                continue;
            }
            dfs_stack.push((r0, 0));
            visited[r0] = step;
            while let Some(&mut (r, ref mut child)) = dfs_stack.last_mut() {
                let pr = pinv[r];
                let advanced = if pr != usize::MAX {
                    let col = &lcols[pr];
                    let mut adv = None;
                    while *child < col.len() {
                        let nxt = col[*child].0;
                        *child += 1;
                        if visited[nxt] != step {
                            visited[nxt] = step;
                            adv = Some(nxt);
                            break;
                        }
                    }
                    adv
                } else {
                    None
                };
                match advanced {
                    Some(nxt) => dfs_stack.push((nxt, 0)),
                    None => {
                        topo.push(r);
                        dfs_stack.pop();
                    }
                }
            }
        }
        // Numeric: x = L^-1 A(:, j) in topological order (reverse postorder).
        for &r in &topo {
            x[r] = 0.0;
        }
        for (&r, &v) in at.row_cols(j).iter().zip(at.row_values(j)) {
            x[r] = v;
        }
        for &r in topo.iter().rev() {
            let pr = pinv[r];
            if pr == usize::MAX {
                continue;
            }
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for &(rr, lv) in &lcols[pr] {
                x[rr] -= xr * lv;
            }
        }
        // Partial pivot among not-yet-pivoted rows.
        let mut prow = usize::MAX;
        let mut pmax = 0.0f64;
        for &r in &topo {
            if pinv[r] == usize::MAX {
                let v = x[r].abs();
                if v > pmax || (v == pmax && prow != usize::MAX && r < prow) {
                    if v >= pmax {
                        pmax = v;
                        prow = r;
                    }
                }
            }
        }
        if prow == usize::MAX || pmax <= tol {
            return Err(SparseError::Singular { step, pivot: pmax });
        }
        let pivot = x[prow];
        let mut ucol = Vec::new();
        let mut lcol = Vec::new();
        for &r in &topo {
            let v = x[r];
            if pinv[r] != usize::MAX {
                if v != 0.0 {
                    ucol.push((pinv[r], v));
                }
            } else if r != prow && v != 0.0 {
                lcol.push((r, v / pivot));
            }
        }
        ucol.push((step, pivot));
        ucols.push(ucol);
        lcols.push(lcol);
        pinv[prow] = step;
        row_perm[step] = prow;
    }

    // Assemble CSR factors in pivot-step coordinates.
    let mut lt = Vec::new();
    let mut ut = Vec::new();
    for (s, col) in lcols.iter().enumerate() {
        lt.push((s, s, 1.0));
        for &(r, v) in col {
            lt.push((pinv[r], s, v));
        }
    }
    for (s, col) in ucols.iter().enumerate() {
        for &(r, v) in col {
            ut.push((r, s, v));
        }
    }
    Ok(SparseLuFactors {
        l: SparseMatrixCsr::from_triplets(n, n, &lt)?,
        u: SparseMatrixCsr::from_triplets(n, n, &ut)?,
        row_perm,
        col_perm,
    })
}

impl SparseLuFactors {
    pub fn order(&self) -> usize {
        self.l.nrows()
    }

    pub fn l(&self) -> &SparseMatrixCsr {
        &self.l
    }

    pub fn u(&self) -> &SparseMatrixCsr {
        &self.u
    }

    pub fn row_perm(&self) -> &[usize] {
        &self.row_perm
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    /// Total stored entries in L and U.
    pub fn fill_nnz(&self) -> usize {
        self.l.nnz() + self.u.nnz()
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order();
        assert_eq!(b.len(), n, "sparse LU solve: dimension mismatch");
        let mut y = vec![0.0; n];
        for k in 0..n {
            y[k] = b[self.row_perm[k]];
        }
        // Forward: L is unit lower triangular in pivot coordinates.
        for i in 0..n {
            let mut acc = y[i];
            for (&j, &v) in self.l.row_cols(i).iter().zip(self.l.row_values(i)) {
                if j < i {
                    acc -= v * y[j];
                }
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            let mut diag = 1.0;
            for (&j, &v) in self.u.row_cols(i).iter().zip(self.u.row_values(i)) {
                if j > i {
                    acc -= v * y[j];
                } else if j == i {
                    diag = v;
                }
            }
            y[i] = acc / diag;
        }
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[self.col_perm[k]] = y[k];
        }
        x
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let x = self.solve(b);
        b.copy_from_slice(&x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::sparse::{DenseLu, DenseMatrix};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn laplace_1d(n: usize) -> SparseMatrixCsr {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        SparseMatrixCsr::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_factors() {
        let f = sparse_lu_factor(&SparseMatrixCsr::identity(5)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        assert_eq!(f.solve(&b), b);
    }

    #[test]
    fn laplacian_matches_dense() {
        let a = laplace_1d(10);
        let f = sparse_lu_factor(&a).unwrap();
        let b: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        let xd = DenseLu::factor(&DenseMatrix::from_csr(&a)).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&xd) {
            assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn singular_rank_one_rejected() {
        let a = SparseMatrixCsr::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)],
        )
        .unwrap();
        assert!(matches!(
            sparse_lu_factor(&a),
            Err(SparseError::Singular { .. })
        ));
    }

    #[test]
    fn pa_equals_lu_on_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + rng.gen::<f64>()));
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                t.push((i, j, rng.gen::<f64>() - 0.5));
            }
        }
        let a = SparseMatrixCsr::from_triplets(n, n, &t).unwrap();
        let f = sparse_lu_factor(&a).unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            // Probe P A Q x' == L U x' by comparing solve-then-multiply.
            let b = a.spmv(&x).unwrap();
            let xs = f.solve(&b);
            let diff: Vec<f64> = xs.iter().zip(&x).map(|(p, q)| p - q).collect();
            assert!(norm2(&diff) <= 1e-12 * norm2(&x).max(1.0));
        }
    }

    #[test]
    fn random_systems_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let n = 20 + 12 * trial;
            let mut t = Vec::new();
            for i in 0..n {
                t.push((i, i, 3.0 + rng.gen::<f64>()));
                for _ in 0..3 {
                    let j = rng.gen_range(0..n);
                    if j != i {
                        t.push((i, j, rng.gen::<f64>() - 0.5));
                    }
                }
            }
            let a = SparseMatrixCsr::from_triplets(n, n, &t).unwrap();
            let f = sparse_lu_factor(&a).unwrap();
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let x = f.solve(&b);
            let r = crate::linalg::sub(&a.spmv(&x).unwrap(), &b);
            assert!(norm2(&r) <= 1e-10 * norm2(&b));
        }
    }
}
