//! Reconstruction and measurement of 3D detonation-cell lattices from
//! instance-labelled voxel volumes.
//!
//! The stages are centroid extraction ([`volume`]), directional lattice-graph
//! construction ([`graph`]), closed-cell surface measurement ([`cellgeom`]) and
//! summary statistics ([`stats`]). [`synthgen`] builds synthetic benchmarks and
//! [`pipeline`] wires everything together behind a config file.

pub mod cellgeom;
pub mod graph;
pub mod pipeline;
pub mod spatial;
pub mod stats;
pub mod synthgen;
pub mod vec3;
pub mod volume;
