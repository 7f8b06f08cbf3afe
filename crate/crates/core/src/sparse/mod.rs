//! Sparse and dense linear-algebra kernels: CSR storage, SpMV, transpose,
//! sparse products, ILU(0), sparse LU with fill, and dense LU.

mod csr;
mod dense;
mod ilu0;
mod market;
mod splu;

pub use csr::SparseMatrixCsr;
pub use dense::{dense_lu_solve, DenseLu, DenseMatrix};
pub use ilu0::{ilu0_factor, Ilu0Factors};
pub use market::{read_matrix_market, read_vector, write_matrix_market};
pub use splu::{sparse_lu_factor, SparseLuFactors};

use thiserror::Error;

/// Errors raised by the sparse kernels.
#[derive(Debug, Error)]
pub enum SparseError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("zero pivot in row {row}")]
    ZeroPivot { row: usize },
    #[error("matrix is singular: pivot {pivot:.3e} at elimination step {step}")]
    Singular { step: usize, pivot: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
