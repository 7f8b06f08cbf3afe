//! Nonlinear Picard iteration, adaptive backward-Euler time stepping, and
//! the benchmark problem library.

mod output;
mod picard;
mod problems;
mod timeloop;

pub use output::{write_run_csv, write_vtk, RunRow};
pub use picard::{
    picard_metric, picard_solve, LinearTolMode, PicardConfig, PicardStats, PrecondId,
    SolverConfig,
};
pub use problems::{
    cavity_problem, hmkh_problem, island_problem, mms_problem, mms_trig_exact, ProblemSpec,
};
pub use timeloop::{advance_time, advance_time_with, StepOutcome, TimeConfig, Trajectory};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("Picard iteration failed to converge in {0} iterations")]
    PicardFailed(usize),
    #[error("time step underflow: dt = {0:.3e}")]
    TimeStepUnderflow(f64),
    #[error("problem definition error: {0}")]
    Problem(String),
    #[error(transparent)]
    Hdg(#[from] crate::hdg::HdgError),
    #[error(transparent)]
    Precond(#[from] crate::precond::PrecondError),
    #[error(transparent)]
    Krylov(#[from] crate::krylov::KrylovError),
    #[error(transparent)]
    Amg(#[from] crate::amg::AmgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
