//! Cell grouping: every background pocket enclosed by the labelled lattice is
//! one cell interior. The graph nodes hugging a pocket are its corners and
//! their convex hull is the cell surface.

use super::{aspect_ratios, axis_extents, convex_hull_indexed, mesh_volume, CellError, TriMesh};
use crate::graph::LatticeGraph;
use crate::spatial::PointIndex;
use crate::volume::{fmt_f64, label_components, Connectivity, LabeledVolume};
use std::collections::{HashSet, VecDeque};
use std::io::Write;

/// Background component that does not touch the grid boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoidRegion {
    /// Discovery rank among all enclosed voids.
    pub id: usize,
    /// Flat voxel indices in scan order.
    pub voxels: Vec<usize>,
}

/// Enclosed background components (6-connected), in scan discovery order.
pub fn find_voids(v: &LabeledVolume) -> Vec<VoidRegion> {
    let labels = v.labels();
    let (components, count) =
        label_components(&v.spec, Connectivity::Face6, |idx| labels[idx] == 0);
    let mut touches = vec![false; count as usize + 1];
    for (idx, &c) in components.iter().enumerate() {
        if c != 0 && !touches[c as usize] && v.spec.on_boundary(v.spec.coords(idx)) {
            touches[c as usize] = true;
        }
    }
    let mut slot = vec![usize::MAX; count as usize + 1];
    let mut voids: Vec<VoidRegion> = Vec::new();
    for c in 1..=count as usize {
        if !touches[c] {
            slot[c] = voids.len();
            voids.push(VoidRegion { id: voids.len(), voxels: Vec::new() });
        }
    }
    for (idx, &c) in components.iter().enumerate() {
        if c != 0 && slot[c as usize] != usize::MAX {
            voids[slot[c as usize]].voxels.push(idx);
        }
    }
    voids
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub cell_id: usize,
    pub extents: [f64; 3],
    pub volume: f64,
    pub aspect: [f64; 3],
    /// Graph nodes grouped into this cell.
    pub node_ids: Vec<usize>,
    pub n_vertices: usize,
}

impl CellRecord {
    pub fn from_mesh(cell_id: usize, mesh: &TriMesh, node_ids: Vec<usize>) -> Result<Self, CellError> {
        let extents = axis_extents(mesh)?;
        Ok(Self {
            cell_id,
            extents,
            volume: mesh_volume(mesh)?,
            aspect: aspect_ratios(extents)?,
            node_ids,
            n_vertices: mesh.vertices.len(),
        })
    }

    /// CSV `cell_id,Lx,Ly,Lz,V,AR1,AR2,AR3,n_vertices`.
    pub fn write_csv<W: Write>(records: &[CellRecord], out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cell_id", "Lx", "Ly", "Lz", "V", "AR1", "AR2", "AR3", "n_vertices"])?;
        for r in records {
            let mut row = vec![r.cell_id.to_string()];
            row.extend(r.extents.iter().map(|&x| fmt_f64(x)));
            row.push(fmt_f64(r.volume));
            row.extend(r.aspect.iter().map(|&x| fmt_f64(x)));
            row.push(r.n_vertices.to_string());
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`CellRecord::write_csv`]; node IDs are not stored there.
    pub fn read_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<CellRecord>> {
        let mut r = csv::Reader::from_reader(input);
        let mut out = Vec::new();
        for row in r.deserialize() {
            let (cell_id, lx, ly, lz, volume, a1, a2, a3, n_vertices): (
                usize, f64, f64, f64, f64, f64, f64, f64, usize,
            ) = row?;
            out.push(CellRecord {
                cell_id,
                extents: [lx, ly, lz],
                volume,
                aspect: [a1, a2, a3],
                node_ids: Vec::new(),
                n_vertices,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub void_id: usize,
    pub mesh: TriMesh,
    pub record: CellRecord,
}

fn induced_connected(g: &LatticeGraph, nodes: &[usize]) -> bool {
    let members: HashSet<usize> = nodes.iter().copied().collect();
    let adj = g.adjacency();
    let mut seen = HashSet::from([nodes[0]]);
    let mut queue = VecDeque::from([nodes[0]]);
    while let Some(n) = queue.pop_front() {
        for &m in &adj[n] {
            if members.contains(&m) && seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    seen.len() == members.len()
}

/// Groups graph nodes around each enclosed void and measures the hull.
///
/// A void qualifies when at least `min_nodes` node centroids lie within
/// `tau_cell` of its voxel centers, those nodes are not coplanar, and their
/// induced subgraph is connected.
pub fn extract_cells(
    g: &LatticeGraph,
    v: &LabeledVolume,
    tau_cell: f64,
    min_nodes: usize,
) -> Result<Vec<Cell>, CellError> {
    if !(tau_cell.is_finite() && tau_cell > 0.0) {
        return Err(CellError::InvalidParams(format!("tau_cell must be > 0, got {tau_cell}")));
    }
    if min_nodes < 4 {
        return Err(CellError::InvalidParams(format!("min_nodes must be >= 4, got {min_nodes}")));
    }
    let voids = find_voids(v);
    let mut cells = Vec::new();
    for void in &voids {
        let centers: Vec<_> = void.voxels.iter().map(|&idx| v.spec.center_of(idx)).collect();
        let index = PointIndex::build(&centers).expect("voids are nonempty");
        let nodes: Vec<usize> = (0..g.nodes.len())
            .filter(|&n| index.nearest_distance(g.nodes.points[n]) <= tau_cell)
            .collect();
        if nodes.len() < min_nodes || !induced_connected(g, &nodes) {
            continue;
        }
        let points: Vec<_> = nodes.iter().map(|&n| g.nodes.points[n]).collect();
        let mesh = match convex_hull_indexed(&points) {
            Ok((mesh, _)) => mesh,
            Err(CellError::Degenerate(why)) => {
                log::warn!("skipping void {}: {why}", void.id);
                continue;
            }
            Err(e) => return Err(e),
        };
        let record = CellRecord::from_mesh(cells.len(), &mesh, nodes)?;
        cells.push(Cell { void_id: void.id, mesh, record });
    }
    if cells.is_empty() {
        return Err(CellError::NoQualifyingVoids { voids: voids.len() });
    }
    Ok(cells)
}
