//! Solvers for the statically condensed HDG trace system of 2D
//! Picard-linearized incompressible resistive MHD.
//!
//! The crate is organized bottom-up:
//!
//! - [`sparse`]: CSR storage and kernels, ILU(0), sparse LU with fill,
//!   dense LU, Matrix Market I/O.
//! - [`krylov`]: non-restarted GMRES and flexible GMRES with right
//!   preconditioning.
//! - [`amg`]: plain-aggregation system algebraic multigrid with strong
//!   smoothers and a direct coarsest solve.
//! - [`precond`]: saddle-point regrouping of the trace system, the BFBT
//!   approximate Schur inverse, the block upper-triangular right
//!   preconditioner, and a one-level ILU(0) baseline.
//! - [`hdg`]: quadrilateral meshes, tensor-product Lagrange bases, local
//!   element solvers, static condensation, boundary conditions and volume
//!   reconstruction.
//! - [`driver`]: Picard iteration, adaptive backward-Euler time stepping,
//!   and the benchmark problem library (MMS, island coalescence, HMKH,
//!   lid-driven cavity).

pub mod amg;
pub mod driver;
pub mod hdg;
pub mod krylov;
pub mod linalg;
pub mod precond;
pub mod sparse;

pub use amg::{AmgConfig, AmgHierarchy, SmootherConfig, SmootherKind};
pub use krylov::{
    fgmres, gmres, IterationHistory, KrylovConfig, LinearOperator, Preconditioner,
};
pub use precond::{BfbtSchur, BlockPreconditioner, SaddleSystem};
pub use sparse::{
    dense_lu_solve, DenseLu, DenseMatrix, Ilu0Factors, SparseLuFactors, SparseMatrixCsr,
};
