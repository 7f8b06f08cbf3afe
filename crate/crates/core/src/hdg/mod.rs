//! 2D high-order HDG discretization of the Picard-linearized incompressible
//! resistive MHD system: structured quadrilateral meshes, tensor-product
//! Lagrange bases, per-element local solvers, static condensation to the
//! global trace system, boundary conditions, and volume reconstruction.

mod basis;
mod errors;
mod fields;
mod local;
mod mesh;
mod params;
mod trace;

pub use basis::BasisP;
pub use errors::{compute_errors, ExactSolution, FieldErrors};
pub use fields::{TraceState, VolumeState};
pub use local::{
    assemble_local, static_condense, CondensedElement, ElemGeom, LocalInputs, LocalSystem,
    side_geometry, SideGeom, N_SIDES,
};
pub use mesh::{build_mesh, BoundaryTag, Edge, QuadMesh, Side};
pub use params::{stabilization, MhdParams};
pub use trace::{
    apply_boundary_conditions, assemble_trace_system, element_normal_flux, BcReduction,
    BoundaryCondition, BoundaryData, ElementRecon, TraceLayout, TraceSystem,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HdgError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("local solver failed on element {element}: {source}")]
    LocalSolve {
        element: usize,
        source: crate::sparse::SparseError,
    },
    #[error("boundary condition error: {0}")]
    BoundaryCondition(String),
    #[error(transparent)]
    Sparse(#[from] crate::sparse::SparseError),
}
