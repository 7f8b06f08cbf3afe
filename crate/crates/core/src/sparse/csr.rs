//! Compressed sparse row storage and kernels.

use super::SparseError;

/// Sparse matrix in compressed-row form with sorted, unique column indices
/// per row. Values are `f64`; explicitly stored zeros are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCsr {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCsr {
    /// Builds a matrix from raw CSR arrays, validating the structural
    /// invariants (monotone offsets, sorted unique columns, matching lengths).
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        let m = Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Checks all CSR invariants.
    pub fn validate(&self) -> Result<(), SparseError> {
        if self.row_offsets.len() != self.nrows + 1 {
            return Err(SparseError::InvalidStructure(format!(
                "row_offsets length {} != nrows+1 = {}",
                self.row_offsets.len(),
                self.nrows + 1
            )));
        }
        if self.row_offsets[0] != 0 {
            return Err(SparseError::InvalidStructure(
                "row_offsets[0] != 0".into(),
            ));
        }
        if *self.row_offsets.last().unwrap() != self.values.len() {
            return Err(SparseError::InvalidStructure(
                "row_offsets[nrows] != len(values)".into(),
            ));
        }
        if self.col_indices.len() != self.values.len() {
            return Err(SparseError::InvalidStructure(
                "len(col_indices) != len(values)".into(),
            ));
        }
        for i in 0..self.nrows {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            if lo > hi {
                return Err(SparseError::InvalidStructure(format!(
                    "row_offsets decreasing at row {i}"
                )));
            }
            let cols = &self.col_indices[lo..hi];
            for (k, &c) in cols.iter().enumerate() {
                if c >= self.ncols {
                    return Err(SparseError::InvalidStructure(format!(
                        "column {c} out of bounds in row {i}"
                    )));
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(SparseError::InvalidStructure(format!(
                        "columns not strictly increasing in row {i}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Empty matrix with no stored entries.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a CSR matrix from (row, col, value) triplets. Duplicate
    /// entries are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        for &(i, j, _) in triplets {
            if i >= nrows || j >= ncols {
                return Err(SparseError::InvalidStructure(format!(
                    "triplet ({i},{j}) out of bounds for {nrows}x{ncols}"
                )));
            }
        }
        // Counting sort by row keeps construction O(nnz + nrows).
        let mut counts = vec![0usize; nrows + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut order = vec![0usize; triplets.len()];
        {
            let mut next = counts.clone();
            for (k, &(i, _, _)) in triplets.iter().enumerate() {
                order[next[i]] = k;
                next[i] += 1;
            }
        }
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            for &k in &order[counts[i]..counts[i + 1]] {
                let (_, j, v) = triplets[k];
                scratch.push((j, v));
            }
            scratch.sort_unstable_by_key(|&(j, _)| j);
            let mut idx = 0;
            while idx < scratch.len() {
                let j = scratch[idx].0;
                let mut v = 0.0;
                while idx < scratch.len() && scratch[idx].0 == j {
                    v += scratch[idx].1;
                    idx += 1;
                }
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Exports all stored entries as (row, col, value) triplets.
    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                out.push((i, self.col_indices[k], self.values[k]));
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices of row `i`.
    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Values of row `i`.
    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Value at (i, j); zero if the entry is not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = self.row_cols(i);
        match cols.binary_search(&j) {
            Ok(k) => self.row_values(i)[k],
            Err(_) => 0.0,
        }
    }

    /// Largest entry magnitude (zero for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// y = A x.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.ncols {
            return Err(SparseError::DimensionMismatch(format!(
                "spmv: x has length {}, matrix has {} columns",
                x.len(),
                self.ncols
            )));
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// y = A x, panicking on dimension mismatch.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "spmv: x length");
        assert_eq!(y.len(), self.nrows, "spmv: y length");
        for i in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            y[i] = acc;
        }
    }

    /// y = A^T x without forming the transpose.
    pub fn spmv_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows, "spmv_t: x length");
        assert_eq!(y.len(), self.ncols, "spmv_t: y length");
        y.fill(0.0);
        for i in 0..self.nrows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                y[self.col_indices[k]] += self.values[k] * xi;
            }
        }
    }

    /// Returns A^T as a new CSR matrix.
    pub fn transpose(&self) -> SparseMatrixCsr {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = counts.clone();
        for i in 0..self.nrows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                col_indices[next[j]] = i;
                values[next[j]] = self.values[k];
                next[j] += 1;
            }
        }
        SparseMatrixCsr {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// C = A B by row-wise accumulation (Gustavson).
    pub fn matmul(&self, other: &SparseMatrixCsr) -> Result<SparseMatrixCsr, SparseError> {
        if self.ncols != other.nrows {
            return Err(SparseError::DimensionMismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let n = other.ncols;
        let mut acc = vec![0.0f64; n];
        let mut marker = vec![usize::MAX; n];
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let a = self.values[k];
                let kk = self.col_indices[k];
                for k2 in other.row_offsets[kk]..other.row_offsets[kk + 1] {
                    let j = other.col_indices[k2];
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * other.values[k2];
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_indices.push(j);
                values.push(acc[j]);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrixCsr {
            nrows: self.nrows,
            ncols: n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Extracts the submatrix with the given rows (in the given order) and a
    /// column relabeling: entry (i, j) survives when `col_map[j]` is `Some`.
    /// Rows are re-sorted after relabeling, so `col_map` need not be monotone.
    pub fn select(
        &self,
        rows: &[usize],
        col_map: &[Option<usize>],
        new_ncols: usize,
    ) -> SparseMatrixCsr {
        assert_eq!(col_map.len(), self.ncols);
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for &i in rows {
            scratch.clear();
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                if let Some(j) = col_map[self.col_indices[k]] {
                    scratch.push((j, self.values[k]));
                }
            }
            scratch.sort_unstable_by_key(|&(j, _)| j);
            for &(j, v) in &scratch {
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        SparseMatrixCsr {
            nrows: rows.len(),
            ncols: new_ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Returns a copy with every diagonal entry present in the pattern,
    /// inserting explicit zeros where missing. Used before ILU(0) on
    /// matrices with empty diagonal blocks.
    pub fn with_full_diagonal(&self) -> SparseMatrixCsr {
        assert_eq!(self.nrows, self.ncols, "with_full_diagonal: square only");
        let mut triplets = self.to_triplets();
        for i in 0..self.nrows {
            if self.row_cols(i).binary_search(&i).is_err() {
                triplets.push((i, i, 0.0));
            }
        }
        SparseMatrixCsr::from_triplets(self.nrows, self.ncols, &triplets).unwrap()
    }

    /// Extracts the diagonal (zeros where not stored).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::DenseMatrix;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_csr(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64) -> SparseMatrixCsr {
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if rng.gen::<f64>() < density {
                    t.push((i, j, rng.gen::<f64>() * 2.0 - 1.0));
                }
            }
        }
        SparseMatrixCsr::from_triplets(n, m, &t).unwrap()
    }

    #[test]
    fn spmv_identity() {
        let a = SparseMatrixCsr::identity(2);
        let y = a.spmv(&[3.0, -1.0]).unwrap();
        assert_eq!(y, vec![3.0, -1.0]);
    }

    #[test]
    fn spmv_small() {
        let a = SparseMatrixCsr::from_triplets(
            2,
            2,
            &[(0, 0, 4.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 4.0)],
        )
        .unwrap();
        let y = a.spmv(&[1.0, 1.0]).unwrap();
        assert_eq!(y, vec![3.0, 3.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = SparseMatrixCsr::identity(3);
        assert!(a.spmv(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn spmv_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_csr(&mut rng, 50, 50, 0.1);
        let x: Vec<f64> = (0..50).map(|_| rng.gen::<f64>() - 0.5).collect();
        let d = DenseMatrix::from_csr(&a);
        let y = a.spmv(&x).unwrap();
        let yd = d.matvec(&x);
        for (ys, yr) in y.iter().zip(&yd) {
            assert!((ys - yr).abs() <= 1e-13, "{ys} vs {yr}");
        }
    }

    #[test]
    fn transpose_identity() {
        let a = SparseMatrixCsr::identity(4);
        assert_eq!(a.transpose(), a);
    }

    #[test]
    fn transpose_row_to_column() {
        let a =
            SparseMatrixCsr::from_triplets(1, 3, &[(0, 0, 1.0), (0, 1, 2.0), (0, 2, 3.0)]).unwrap();
        let t = a.transpose();
        assert_eq!(t.nrows(), 3);
        assert_eq!(t.ncols(), 1);
        assert_eq!(t.to_triplets(), vec![(0, 0, 1.0), (1, 0, 2.0), (2, 0, 3.0)]);
    }

    #[test]
    fn transpose_involution_and_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_csr(&mut rng, 23, 17, 0.15);
        let att = a.transpose().transpose();
        assert_eq!(a, att);
        let x: Vec<f64> = (0..17).map(|_| rng.gen::<f64>()).collect();
        let y1 = a.spmv(&x).unwrap();
        let y2 = att.spmv(&x).unwrap();
        assert_eq!(y1, y2);
    }

    #[test]
    fn matmul_against_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_csr(&mut rng, 12, 9, 0.3);
        let b = random_csr(&mut rng, 9, 14, 0.3);
        let c = a.matmul(&b).unwrap();
        let cd = DenseMatrix::from_csr(&a).matmul(&DenseMatrix::from_csr(&b));
        for (i, j, v) in c.to_triplets() {
            assert!((v - cd.get(i, j)).abs() < 1e-13);
        }
        for i in 0..12 {
            for j in 0..14 {
                assert!((c.get(i, j) - cd.get(i, j)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn select_reorders_columns() {
        let a = SparseMatrixCsr::from_triplets(
            2,
            3,
            &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)],
        )
        .unwrap();
        // keep cols 2 -> 0 and 0 -> 1, drop col 1
        let s = a.select(&[1, 0], &[Some(1), None, Some(0)], 2);
        assert_eq!(s.to_triplets(), vec![(1, 0, 2.0), (1, 1, 1.0)]);
    }

    #[test]
    fn full_diagonal_inserts_zeros() {
        let a = SparseMatrixCsr::from_triplets(3, 3, &[(0, 1, 1.0), (2, 2, 5.0)]).unwrap();
        let b = a.with_full_diagonal();
        assert_eq!(b.get(0, 0), 0.0);
        assert!(b.row_cols(0).contains(&0));
        assert!(b.row_cols(1).contains(&1));
        assert_eq!(b.get(2, 2), 5.0);
        assert_eq!(b.nnz(), 5);
    }

    proptest! {
        // Round trip: triplets -> CSR -> triplets preserves the duplicate-summed set.
        #[test]
        fn triplet_round_trip(entries in proptest::collection::vec((0usize..8, 0usize..8, -10.0f64..10.0), 0..60)) {
            let a = SparseMatrixCsr::from_triplets(8, 8, &entries).unwrap();
            a.validate().unwrap();
            let mut expect = std::collections::BTreeMap::new();
            for (i, j, v) in entries {
                *expect.entry((i, j)).or_insert(0.0) += v;
            }
            let got: Vec<_> = a.to_triplets();
            prop_assert_eq!(got.len(), expect.len());
            for (i, j, v) in got {
                let e = expect[&(i, j)];
                prop_assert!((v - e).abs() <= 1e-12 * (1.0 + e.abs()));
            }
        }

        // (A^T)^T == A bit-exact.
        #[test]
        fn transpose_involution_prop(entries in proptest::collection::vec((0usize..10, 0usize..7, -1.0f64..1.0), 0..50)) {
            let a = SparseMatrixCsr::from_triplets(10, 7, &entries).unwrap();
            prop_assert_eq!(a.transpose().transpose(), a);
        }
    }
}
