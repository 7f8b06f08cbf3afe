//! Unsmoothed plain-aggregation system AMG for the nodal trace block:
//! node-blocked coarsening, strong smoothers, v-cycle application, and a
//! direct solve on the coarsest level.

mod aggregate;
mod hierarchy;
mod smoother;

pub use aggregate::{aggregate, Aggregates, NodeGraph};
pub use hierarchy::{build_hierarchy, AmgConfig, AmgHierarchy, NodalBlockLayout};
pub use smoother::{smooth, LevelSmoother, SmootherConfig, SmootherKind};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AmgError {
    #[error("empty node graph")]
    EmptyGraph,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("coarsest-level factorization failed: {0}")]
    CoarseSolve(#[from] crate::sparse::SparseError),
    #[error("smoother failure: {0}")]
    Smoother(String),
}
