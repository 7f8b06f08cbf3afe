//! Multigrid hierarchy construction and v-cycle application.
//!
//! Coarsening is node-blocked: the connectivity graph collapses each nodal
//! block of the fine operator to one vertex, so all unknowns of a node join
//! the same aggregate and the inter-variable coupling survives coarsening.
//! The tentative prolongator is unsmoothed block injection: every aggregate
//! carries one coarse slot per unknown component present among its member
//! nodes, with identity sub-blocks.

use super::aggregate::{aggregate, Aggregates, NodeGraph};
use super::smoother::{LevelSmoother, SmootherConfig};
use super::AmgError;
use crate::sparse::{sparse_lu_factor, SparseLuFactors, SparseMatrixCsr};

/// Maps matrix unknowns to nodal blocks. Each node owns a contiguous dof
/// range; `component[d]` identifies which of the `dofs_per_node` slots dof
/// `d` occupies (nodes at boundaries may carry fewer than `dofs_per_node`
/// dofs, but the slot order is preserved).
#[derive(Debug, Clone)]
pub struct NodalBlockLayout {
    node_offsets: Vec<usize>,
    component: Vec<u8>,
    dofs_per_node: usize,
}

impl NodalBlockLayout {
    pub fn new(node_offsets: Vec<usize>, component: Vec<u8>, dofs_per_node: usize) -> Self {
        assert!(!node_offsets.is_empty());
        assert_eq!(*node_offsets.last().unwrap(), component.len());
        for w in node_offsets.windows(2) {
            assert!(w[0] <= w[1], "node offsets must be nondecreasing");
            let comps = &component[w[0]..w[1]];
            for c in comps.windows(2) {
                assert!(c[0] < c[1], "components must be increasing within a node");
            }
        }
        assert!(component.iter().all(|&c| (c as usize) < dofs_per_node));
        Self {
            node_offsets,
            component,
            dofs_per_node,
        }
    }

    /// Scalar layout: one dof per node.
    pub fn scalar(n: usize) -> Self {
        Self {
            node_offsets: (0..=n).collect(),
            component: vec![0; n],
            dofs_per_node: 1,
        }
    }

    /// Uniform layout with `dofs_per_node` consecutive dofs per node.
    pub fn uniform(n_nodes: usize, dofs_per_node: usize) -> Self {
        let node_offsets = (0..=n_nodes).map(|i| i * dofs_per_node).collect();
        let component = (0..n_nodes * dofs_per_node)
            .map(|d| (d % dofs_per_node) as u8)
            .collect();
        Self {
            node_offsets,
            component,
            dofs_per_node,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.node_offsets.len() - 1
    }

    pub fn n_dofs(&self) -> usize {
        self.component.len()
    }

    pub fn dofs_per_node(&self) -> usize {
        self.dofs_per_node
    }

    pub fn node_dofs(&self, node: usize) -> std::ops::Range<usize> {
        self.node_offsets[node]..self.node_offsets[node + 1]
    }

    pub fn component_of(&self, dof: usize) -> u8 {
        self.component[dof]
    }

    /// Node owning each dof.
    pub fn dof_nodes(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_dofs()];
        for node in 0..self.n_nodes() {
            for d in self.node_dofs(node) {
                out[d] = node;
            }
        }
        out
    }
}

/// Controls for hierarchy construction. Defaults: stop coarsening at 64
/// nodes, at most 10 levels, three pre- and three post-smoothing steps.
#[derive(Debug, Clone, Copy)]
pub struct AmgConfig {
    pub smoother: SmootherConfig,
    pub pre_steps: usize,
    pub post_steps: usize,
    pub coarse_threshold: usize,
    pub max_levels: usize,
}

impl AmgConfig {
    pub fn new(smoother: SmootherConfig) -> Self {
        Self {
            smoother,
            pre_steps: 3,
            post_steps: 3,
            coarse_threshold: 64,
            max_levels: 10,
        }
    }
}

struct Level {
    a: SparseMatrixCsr,
    /// Prolongator from the next-coarser level into this one.
    p: Option<SparseMatrixCsr>,
    smoother: Option<LevelSmoother>,
    aggregates: Option<Aggregates>,
}

/// Level operators, unsmoothed tentative prolongators, per-level smoothers,
/// and the coarsest-level factorization.
pub struct AmgHierarchy {
    levels: Vec<Level>,
    coarse_lu: SparseLuFactors,
    cfg: AmgConfig,
    layouts: Vec<NodalBlockLayout>,
}

/// Builds the nodal connectivity graph of `a` under `layout`: nodes are
/// joined when any dof of one couples to any dof of the other.
pub fn node_graph(a: &SparseMatrixCsr, layout: &NodalBlockLayout) -> NodeGraph {
    let dof_node = layout.dof_nodes();
    let mut edges = Vec::new();
    for i in 0..a.nrows() {
        let ni = dof_node[i];
        for &j in a.row_cols(i) {
            let nj = dof_node[j];
            if ni != nj {
                edges.push((ni, nj));
            }
        }
    }
    NodeGraph::new(layout.n_nodes(), &edges)
}

/// Tentative prolongator for one coarsening step, plus the coarse layout.
fn tentative_prolongator(
    layout: &NodalBlockLayout,
    aggs: &Aggregates,
    dpn: usize,
) -> (SparseMatrixCsr, NodalBlockLayout) {
    let n_agg = aggs.n_aggregates;
    // Which component slots appear in each aggregate.
    let mut present = vec![vec![false; dpn]; n_agg];
    for node in 0..layout.n_nodes() {
        let agg = aggs.node_to_aggregate[node];
        for d in layout.node_dofs(node) {
            present[agg][layout.component_of(d) as usize] = true;
        }
    }
    let mut coarse_offsets = Vec::with_capacity(n_agg + 1);
    let mut coarse_component = Vec::new();
    let mut slot = vec![vec![usize::MAX; dpn]; n_agg];
    coarse_offsets.push(0);
    for agg in 0..n_agg {
        for c in 0..dpn {
            if present[agg][c] {
                slot[agg][c] = coarse_component.len();
                coarse_component.push(c as u8);
            }
        }
        coarse_offsets.push(coarse_component.len());
    }
    let n_coarse = coarse_component.len();
    let mut triplets = Vec::with_capacity(layout.n_dofs());
    for node in 0..layout.n_nodes() {
        let agg = aggs.node_to_aggregate[node];
        for d in layout.node_dofs(node) {
            let c = layout.component_of(d) as usize;
            triplets.push((d, slot[agg][c], 1.0));
        }
    }
    let p = SparseMatrixCsr::from_triplets(layout.n_dofs(), n_coarse, &triplets).unwrap();
    let coarse_layout = NodalBlockLayout::new(coarse_offsets, coarse_component, dpn);
    (p, coarse_layout)
}

/// Builds the multigrid hierarchy for the nodal block operator `f`.
/// Coarsening stops at `coarse_threshold` nodes, at the level cap, or when
/// aggregation stalls; the coarsest operator is factorized with sparse LU.
pub fn build_hierarchy(
    f: &SparseMatrixCsr,
    layout: &NodalBlockLayout,
    cfg: &AmgConfig,
) -> Result<AmgHierarchy, AmgError> {
    if f.nrows() != f.ncols() {
        return Err(AmgError::DimensionMismatch(
            "hierarchy: operator must be square".into(),
        ));
    }
    if f.nrows() != layout.n_dofs() {
        return Err(AmgError::DimensionMismatch(format!(
            "hierarchy: operator dimension {} vs layout dofs {}",
            f.nrows(),
            layout.n_dofs()
        )));
    }
    let dpn = layout.dofs_per_node();
    let mut levels: Vec<Level> = Vec::new();
    let mut layouts = vec![layout.clone()];
    let mut a = f.clone();
    let mut current = layout.clone();
    loop {
        let n_nodes = current.n_nodes();
        let coarsen = n_nodes > cfg.coarse_threshold && levels.len() + 1 < cfg.max_levels;
        if !coarsen {
            levels.push(Level {
                a,
                p: None,
                smoother: None,
                aggregates: None,
            });
            break;
        }
        let graph = node_graph(&a, &current);
        let seed: Vec<usize> = (0..n_nodes).collect();
        let aggs = aggregate(&graph, &seed)?;
        if aggs.n_aggregates >= n_nodes {
            // No progress; finish with a direct solve on this level.
            levels.push(Level {
                a,
                p: None,
                smoother: None,
                aggregates: None,
            });
            break;
        }
        let (p, coarse_layout) = tentative_prolongator(&current, &aggs, dpn);
        let ap = a.matmul(&p).map_err(AmgError::CoarseSolve)?;
        let coarse = p.transpose().matmul(&ap).map_err(AmgError::CoarseSolve)?;
        let smoother = LevelSmoother::build(&cfg.smoother, &a)?;
        levels.push(Level {
            a,
            p: Some(p),
            smoother: Some(smoother),
            aggregates: Some(aggs),
        });
        layouts.push(coarse_layout.clone());
        a = coarse;
        current = coarse_layout;
    }
    let coarse_lu = sparse_lu_factor(&levels.last().unwrap().a)?;
    Ok(AmgHierarchy {
        levels,
        coarse_lu,
        cfg: *cfg,
        layouts,
    })
}

impl AmgHierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn fine_dim(&self) -> usize {
        self.levels[0].a.nrows()
    }

    pub fn operator(&self, level: usize) -> &SparseMatrixCsr {
        &self.levels[level].a
    }

    pub fn prolongator(&self, level: usize) -> Option<&SparseMatrixCsr> {
        self.levels[level].p.as_ref()
    }

    pub fn aggregates(&self, level: usize) -> Option<&Aggregates> {
        self.levels[level].aggregates.as_ref()
    }

    pub fn layout(&self, level: usize) -> &NodalBlockLayout {
        &self.layouts[level]
    }

    /// True when every level smoother applies a fixed linear map, making the
    /// whole v-cycle a fixed preconditioner.
    pub fn is_linear(&self) -> bool {
        self.cfg.smoother.kind.is_linear()
    }

    /// One v-cycle approximating F^-1 r.
    pub fn vcycle(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.fine_dim(), "vcycle: dimension mismatch");
        self.cycle_level(0, r)
    }

    fn cycle_level(&self, l: usize, r: &[f64]) -> Vec<f64> {
        let level = &self.levels[l];
        if level.p.is_none() {
            return self.coarse_lu.solve(r);
        }
        let a = &level.a;
        let p = level.p.as_ref().unwrap();
        let smoother = level.smoother.as_ref().unwrap();
        let n = a.nrows();
        let mut x = vec![0.0; n];
        smoother.apply(a, &mut x, r, self.cfg.pre_steps);
        let mut work = vec![0.0; n];
        a.spmv_into(&x, &mut work);
        for i in 0..n {
            work[i] = r[i] - work[i];
        }
        let mut rc = vec![0.0; p.ncols()];
        p.spmv_transpose_into(&work, &mut rc);
        let ec = self.cycle_level(l + 1, &rc);
        let mut ef = vec![0.0; n];
        p.spmv_into(&ec, &mut ef);
        for i in 0..n {
            x[i] += ef[i];
        }
        smoother.apply(a, &mut x, r, self.cfg.post_steps);
        x
    }

    /// Per-level summary: (nodes, dofs, nnz) plus the operator complexity
    /// (total stored entries over fine-level entries).
    pub fn summary(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let nnz0 = self.levels[0].a.nnz() as f64;
        let mut total = 0usize;
        writeln!(s, "level    nodes      dofs       nnz").unwrap();
        for (l, level) in self.levels.iter().enumerate() {
            total += level.a.nnz();
            writeln!(
                s,
                "{:5} {:8} {:9} {:9}",
                l,
                self.layouts[l].n_nodes(),
                level.a.nrows(),
                level.a.nnz()
            )
            .unwrap();
        }
        writeln!(s, "operator complexity: {:.3}", total as f64 / nnz0).unwrap();
        s
    }
}

impl crate::krylov::Preconditioner for AmgHierarchy {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let x = self.vcycle(r);
        z.copy_from_slice(&x);
    }
    fn is_variable(&self) -> bool {
        !self.is_linear()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amg::SmootherKind;
    use crate::linalg::{norm2, sub};
    use crate::sparse::DenseMatrix;

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

    fn laplace_2d(nx: usize) -> SparseMatrixCsr {
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

    fn cfg(kind: SmootherKind, threshold: usize) -> AmgConfig {
        let mut c = AmgConfig::new(SmootherConfig::new(kind, 3));
        c.coarse_threshold = threshold;
        c
    }

    #[test]
    fn block_identity_preserved() {
        // 8 nodes of 4 identical dofs, block-diagonal identity coupling plus
        // a chain so aggregation has a graph to work with.
        let dpn = 4;
        let nodes = 8;
        let mut t = Vec::new();
        for node in 0..nodes {
            for c in 0..dpn {
                let d = node * dpn + c;
                t.push((d, d, 1.0));
                if node + 1 < nodes {
                    t.push((d, (node + 1) * dpn + c, 1e-8));
                    t.push(((node + 1) * dpn + c, d, 1e-8));
                }
            }
        }
        let a = SparseMatrixCsr::from_triplets(nodes * dpn, nodes * dpn, &t).unwrap();
        let layout = NodalBlockLayout::uniform(nodes, dpn);
        let h = build_hierarchy(&a, &layout, &cfg(SmootherKind::Jacobi, 2)).unwrap();
        assert!(h.n_levels() >= 2);
        let p = h.prolongator(0).unwrap();
        // Injection: each fine dof appears in exactly one coarse column with weight 1.
        for i in 0..p.nrows() {
            assert_eq!(p.row_cols(i).len(), 1);
            assert_eq!(p.row_values(i)[0], 1.0);
        }
        // Coarse operator stays block-diagonal-identity-like: diagonal equals
        // aggregate sizes (up to the tiny chain coupling).
        let coarse = h.operator(1);
        for i in 0..coarse.nrows() {
            assert!(coarse.get(i, i) >= 1.0);
        }
    }

    #[test]
    fn galerkin_triple_product_scalar() {
        let a = laplace_1d(16);
        let layout = NodalBlockLayout::scalar(16);
        let h = build_hierarchy(&a, &layout, &cfg(SmootherKind::Jacobi, 4)).unwrap();
        assert!(h.n_levels() >= 2);
        let p = h.prolongator(0).unwrap();
        let pd = DenseMatrix::from_csr(p);
        let ad = DenseMatrix::from_csr(&a);
        let expect = pd.transpose().matmul(&ad).matmul(&pd);
        let got = h.operator(1);
        let scale = a.max_abs();
        for i in 0..got.nrows() {
            for j in 0..got.ncols() {
                assert!(
                    (got.get(i, j) - expect.get(i, j)).abs() <= 1e-12 * scale,
                    "mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn below_threshold_single_level_direct() {
        let a = laplace_1d(10);
        let layout = NodalBlockLayout::scalar(10);
        let h = build_hierarchy(&a, &layout, &cfg(SmootherKind::Jacobi, 64)).unwrap();
        assert_eq!(h.n_levels(), 1);
        // Degenerate hierarchy: the v-cycle is an exact solve.
        let b: Vec<f64> = (0..10).map(|i| (i as f64).cos()).collect();
        let x = h.vcycle(&b);
        let r = sub(&a.spmv(&x).unwrap(), &b);
        assert!(norm2(&r) <= 1e-10 * norm2(&b));
    }

    #[test]
    fn vcycle_zero_input() {
        let a = laplace_1d(32);
        let h = build_hierarchy(&a, &NodalBlockLayout::scalar(32), &cfg(SmootherKind::Ilu0, 8))
            .unwrap();
        let z = h.vcycle(&vec![0.0; 32]);
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vcycle_contraction_on_2d_laplacian() {
        let nx = 32;
        let a = laplace_2d(nx);
        let n = nx * nx;
        let h = build_hierarchy(&a, &NodalBlockLayout::scalar(n), &cfg(SmootherKind::Ilu0, 64))
            .unwrap();
        assert!(h.n_levels() >= 2);
        // Error-propagation: e <- e - vcycle(A e); contraction factor < 0.5.
        let mut e: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i * 37 % 101) as f64) / 101.0)
            .collect();
        let mut prev = norm2(&e);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let ae = a.spmv(&e).unwrap();
            let c = h.vcycle(&ae);
            for i in 0..n {
                e[i] -= c[i];
            }
            let now = norm2(&e);
            if prev > 1e-300 {
                worst = worst.max(now / prev);
            }
            prev = now;
        }
        assert!(worst < 0.5, "contraction factor {worst}");
    }

    #[test]
    fn vcycle_linear_for_linear_smoothers() {
        let a = laplace_2d(12);
        let n = 144;
        for kind in [SmootherKind::Jacobi, SmootherKind::GaussSeidel, SmootherKind::Ilu0] {
            let h =
                build_hierarchy(&a, &NodalBlockLayout::scalar(n), &cfg(kind, 16)).unwrap();
            assert!(h.is_linear());
            let r1: Vec<f64> = (0..n).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
            let r2: Vec<f64> = (0..n).map(|i| ((i * 5 % 11) as f64) - 5.0).collect();
            let (alpha, beta) = (0.3, -1.7);
            let combo: Vec<f64> = r1
                .iter()
                .zip(&r2)
                .map(|(a, b)| alpha * a + beta * b)
                .collect();
            let y_combo = h.vcycle(&combo);
            let y1 = h.vcycle(&r1);
            let y2 = h.vcycle(&r2);
            let scale = norm2(&y_combo).max(1.0);
            for i in 0..n {
                let lin = alpha * y1[i] + beta * y2[i];
                assert!(
                    (y_combo[i] - lin).abs() <= 1e-11 * scale,
                    "kind {kind:?} not linear"
                );
            }
        }
        let h = build_hierarchy(
            &a,
            &NodalBlockLayout::scalar(n),
            &cfg(SmootherKind::GmresIlu0, 16),
        )
        .unwrap();
        assert!(!h.is_linear());
    }

    #[test]
    fn deterministic_rebuild() {
        let a = laplace_2d(16);
        let layout = NodalBlockLayout::scalar(256);
        let c = cfg(SmootherKind::Ilu0, 16);
        let h1 = build_hierarchy(&a, &layout, &c).unwrap();
        let h2 = build_hierarchy(&a, &layout, &c).unwrap();
        assert_eq!(h1.n_levels(), h2.n_levels());
        for l in 0..h1.n_levels() {
            assert_eq!(h1.operator(l), h2.operator(l));
        }
        let r: Vec<f64> = (0..256).map(|i| (i as f64).sin()).collect();
        assert_eq!(h1.vcycle(&r), h2.vcycle(&r));
    }

    #[test]
    fn ptp_is_scaled_identity_blocks() {
        let a = laplace_2d(10);
        let h =
            build_hierarchy(&a, &NodalBlockLayout::scalar(100), &cfg(SmootherKind::Jacobi, 8))
                .unwrap();
        let p = h.prolongator(0).unwrap();
        let ptp = p.transpose().matmul(p).unwrap();
        for i in 0..ptp.nrows() {
            for (&j, &v) in ptp.row_cols(i).iter().zip(ptp.row_values(i)) {
                if i == j {
                    assert!(v >= 1.0 && (v - v.round()).abs() < 1e-12);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn summary_prints_levels() {
        let a = laplace_2d(12);
        let h = build_hierarchy(&a, &NodalBlockLayout::scalar(144), &cfg(SmootherKind::Ilu0, 16))
            .unwrap();
        let s = h.summary();
        assert!(s.contains("operator complexity"));
        assert!(s.lines().count() >= h.n_levels() + 2);
    }
}
