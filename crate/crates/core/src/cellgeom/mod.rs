//! Closed cells recovered from the lattice graph, and their measurements.

mod extract;
mod hull;
mod mesh;

pub use extract::{extract_cells, find_voids, Cell, CellRecord, VoidRegion};
pub use hull::{convex_hull, convex_hull_indexed};
pub use mesh::{aspect_ratios, axis_extents, mesh_volume, TriMesh};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CellError {
    #[error("degenerate point set: {0}")]
    Degenerate(String),
    #[error("mesh is not a closed manifold: {0}")]
    OpenMesh(String),
    #[error("mesh has no vertices")]
    EmptyMesh,
    #[error("zero extent in {0:?}")]
    ZeroExtent([f64; 3]),
    #[error("no qualifying voids ({voids} candidate voids found)")]
    NoQualifyingVoids { voids: usize },
    #[error("invalid extraction parameters: {0}")]
    InvalidParams(String),
}
