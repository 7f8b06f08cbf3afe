//! Non-restarted GMRES and flexible GMRES with right preconditioning.

mod gmres;

pub use gmres::{fgmres, gmres, KrylovConfig};

use crate::sparse::SparseMatrixCsr;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value encountered in the Krylov basis at iteration {0}")]
    NonFinite(usize),
    #[error("gmres requires a fixed preconditioner; use fgmres for variable ones")]
    VariablePreconditioner,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A linear action y = A x on fixed-dimension vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// A preconditioner action z = M^-1 r. `is_variable` must return true when
/// the action can change between calls (inner iterative solves); such
/// preconditioners are only admissible in FGMRES.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
    fn is_variable(&self) -> bool {
        false
    }
}

impl LinearOperator for SparseMatrixCsr {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y);
    }
}

/// Identity preconditioner (unpreconditioned solves).
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Per-solve convergence record. Entry 0 is the initial residual; one entry
/// follows per Krylov iteration. For a relative tolerance the entries are
/// scaled by the right-hand-side norm.
#[derive(Debug, Clone)]
pub struct IterationHistory {
    pub relres: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl IterationHistory {
    /// Appends `(solve_id, iter, relres)` rows to a CSV writer.
    pub fn write_csv<W: Write>(&self, solve_id: &str, w: &mut W) -> Result<(), KrylovError> {
        for (it, r) in self.relres.iter().enumerate() {
            writeln!(w, "{solve_id},{it},{r:.12e}")?;
        }
        Ok(())
    }
}
