//! Structured meshes on the paper-scale test domains and P1/P2 finite
//! element assembly with homogeneous Dirichlet conditions eliminated.

mod assemble;
mod mesh;

pub use assemble::{assemble, l2_project, FeOrder, FeSpace};
pub use mesh::{lshape_mesh, unit_interval_mesh, unit_square_mesh, Cells, Mesh};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("mesh resolution must be at least 2, got {0}")]
    ResolutionTooSmall(usize),
    #[error("L-shape resolution must be even so the re-entrant corner is a vertex, got {0}")]
    OddLshapeResolution(usize),
    #[error("element {0} is degenerate (measure {1:.3e})")]
    DegenerateElement(usize, f64),
    #[error("P2 elements are only supported on triangles")]
    UnsupportedOrder,
    #[error("mesh text format: {0}")]
    Format(String),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}
