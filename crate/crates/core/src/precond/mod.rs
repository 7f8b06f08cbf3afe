//! Saddle-point regrouping of the trace system, the BFBT approximate Schur
//! inverse, the block upper-triangular right preconditioner, and the
//! one-level ILU(0) baseline.

mod baseline;
mod bfbt;
mod block;
mod saddle;

pub use baseline::{one_level_ilu0_baseline, DdIlu0};
pub use bfbt::{BfbtSchur, NullspacePolicy};
pub use block::{exact_schur_dense, BlockPreconditioner, InverseAction};
pub use saddle::{split_saddle, SaddleSystem};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrecondError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("saddle blocks inconsistent: {0}")]
    InconsistentBlocks(String),
    #[error("normal matrix B*B^T is singular and no pinning was allowed")]
    SingularNormalMatrix,
    #[error(transparent)]
    Sparse(#[from] crate::sparse::SparseError),
    #[error(transparent)]
    Amg(#[from] crate::amg::AmgError),
}
