//! Graph-truth lattice: vertex blobs, edge trails and thin face walls on a
//! (possibly jittered) cubic vertex lattice.
//!
//! Every marked voxel takes the ID of its nearest vertex. The real lattice is
//! wrapped in one ring of unlabelled virtual vertices, so each real label sees
//! the same surroundings on all sides and every enclosed cube is a void.

use super::{rng, SynthError};
use crate::vec3::{dist2, segment_dist2, triangle_dist2, Point3};
use crate::volume::{fmt_f64, GridSpec, LabeledVolume};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Wall half-thickness in voxels; 0.5 is the thinnest surface that a
/// face-connected background path cannot cross.
const WALL_HALF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphLatticeConfig {
    /// Cells per axis.
    pub cells: [usize; 3],
    /// Vertex spacing in voxels; odd values avoid nearest-vertex ties.
    pub pitch: usize,
    /// Maximum vertex displacement per axis as a fraction of the pitch.
    pub jitter: f64,
    pub trail_radius: f64,
    pub blob_radius: f64,
    /// Physical voxel size.
    pub spacing: f64,
    /// Jitter seed; supplied by the run, not the config section.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for GraphLatticeConfig {
    fn default() -> Self {
        Self {
            cells: [2, 2, 2],
            pitch: 11,
            jitter: 0.0,
            trail_radius: 1.0,
            blob_radius: 2.0,
            spacing: 1.0,
            seed: 0,
        }
    }
}

impl GraphLatticeConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.cells.contains(&0) {
            return bad(format!("cells must be >= 1 per axis, got {:?}", self.cells));
        }
        if !(0.0..0.3).contains(&self.jitter) {
            return bad(format!("jitter must lie in [0, 0.3), got {}", self.jitter));
        }
        for (name, r) in [("trail_radius", self.trail_radius), ("blob_radius", self.blob_radius)] {
            if !(r.is_finite() && r >= 1.0) {
                return bad(format!("{name} must be >= 1 voxel, got {r}"));
            }
        }
        if (self.pitch as f64) < 2.0 * self.blob_radius + 2.0 || self.pitch < 5 {
            return bad(format!(
                "pitch {} too small for blob radius {}",
                self.pitch, self.blob_radius
            ));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return bad(format!("spacing must be > 0, got {}", self.spacing));
        }
        Ok(())
    }

    /// Voxels per axis.
    pub fn dims(&self) -> [usize; 3] {
        self.cells.map(|m| self.pitch * (m + 2) + 1)
    }

    pub fn node_count(&self) -> usize {
        self.cells.iter().map(|m| m + 1).product()
    }
}

#[derive(Debug, Clone)]
pub struct GraphLattice {
    pub volume: LabeledVolume,
    /// Physical vertex positions; node `n` carries label `n + 1`.
    pub nodes: Vec<Point3>,
    /// Lattice edges `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Enclosed cubes, one per cell.
    pub void_count: usize,
}

impl GraphLattice {
    /// CSV `id,x,y,z` with `id` the label.
    pub fn write_nodes_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "x", "y", "z"])?;
        for (n, p) in self.nodes.iter().enumerate() {
            w.write_record([(n + 1).to_string(), fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2])])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `i,j` of zero-based node indices.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j"])?;
        for (i, j) in &self.edges {
            w.write_record([i.to_string(), j.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Extended vertex grid: indices `0..=m+2` per axis, real ones `1..=m+1`.
struct Vertices {
    ext: [usize; 3],
    cells: [usize; 3],
    pos: Vec<Point3>,
}

impl Vertices {
    fn index(&self, s: [usize; 3]) -> usize {
        s[0] + self.ext[0] * (s[1] + self.ext[1] * s[2])
    }

    fn is_real(&self, s: [usize; 3]) -> bool {
        (0..3).all(|a| s[a] >= 1 && s[a] <= self.cells[a] + 1)
    }

    /// Label of a real vertex: 1 + x-fastest rank among real vertices.
    fn label(&self, s: [usize; 3]) -> u32 {
        let [rx, ry, _] = self.cells.map(|m| m + 1);
        (1 + (s[0] - 1) + rx * ((s[1] - 1) + ry * (s[2] - 1))) as u32
    }

    fn all(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let [ex, ey, ez] = self.ext;
        (0..ez).flat_map(move |c| (0..ey).flat_map(move |b| (0..ex).map(move |a| [a, b, c])))
    }
}

fn vertices(cfg: &GraphLatticeConfig) -> Vertices {
    let ext = cfg.cells.map(|m| m + 3);
    let p = cfg.pitch as f64;
    let mut v = Vertices { ext, cells: cfg.cells, pos: Vec::new() };
    v.pos = v.all().map(|s| s.map(|c| c as f64 * p)).collect();
    if cfg.jitter > 0.0 {
        let mut r = rng(cfg.seed);
        let amp = cfg.jitter * p;
        let real: Vec<[usize; 3]> = v.all().filter(|&s| v.is_real(s)).collect();
        // `all()` is x-fastest, which is also label order.
        for s in real {
            let idx = v.index(s);
            for a in 0..3 {
                v.pos[idx][a] += r.random_range(-amp..amp);
            }
        }
    }
    v
}

/// Marks voxels within `reach` of a primitive whose bounding box is `[lo, hi]`.
fn mark(
    marked: &mut [bool],
    dims: [usize; 3],
    lo: Point3,
    hi: Point3,
    reach: f64,
    inside: impl Fn(Point3) -> bool,
) {
    let range = |a: usize| {
        let l = (lo[a] - reach).ceil().max(0.0) as usize;
        let h = ((hi[a] + reach).floor().max(-1.0) + 1.0) as usize;
        l..h.min(dims[a])
    };
    for k in range(2) {
        for j in range(1) {
            for i in range(0) {
                let idx = i + dims[0] * (j + dims[1] * k);
                if !marked[idx] && inside([i as f64, j as f64, k as f64]) {
                    marked[idx] = true;
                }
            }
        }
    }
}

fn bbox(points: &[Point3]) -> (Point3, Point3) {
    crate::vec3::bounds(points).expect("primitive has points")
}

pub fn generate_graph_lattice(cfg: &GraphLatticeConfig) -> Result<GraphLattice, SynthError> {
    cfg.validate()?;
    let dims = cfg.dims();
    let verts = vertices(cfg);
    let mut marked = vec![false; dims.iter().product()];
    let unit = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let step = |s: [usize; 3], d: [usize; 3]| [s[0] + d[0], s[1] + d[1], s[2] + d[2]];
    let max_s = verts.ext.map(|e| e - 1);

    for s in verts.all() {
        let c = verts.pos[verts.index(s)];
        let r = cfg.blob_radius;
        mark(&mut marked, dims, c, c, r, |p| dist2(p, c) <= r * r);
        for (a, d) in unit.iter().enumerate() {
            if s[a] == max_s[a] {
                continue;
            }
            let q = verts.pos[verts.index(step(s, *d))];
            let (lo, hi) = bbox(&[c, q]);
            let r = cfg.trail_radius;
            mark(&mut marked, dims, lo, hi, r, |p| segment_dist2(p, c, q) <= r * r);
        }
        // Face spanned by the two axes other than `a`.
        for a in 0..3 {
            let (u, w) = ((a + 1) % 3, (a + 2) % 3);
            if s[u] == max_s[u] || s[w] == max_s[w] {
                continue;
            }
            let q1 = verts.pos[verts.index(step(s, unit[u]))];
            let q2 = verts.pos[verts.index(step(step(s, unit[u]), unit[w]))];
            let q3 = verts.pos[verts.index(step(s, unit[w]))];
            let (lo, hi) = bbox(&[c, q1, q2, q3]);
            let r2 = WALL_HALF * WALL_HALF;
            mark(&mut marked, dims, lo, hi, WALL_HALF, |p| {
                triangle_dist2(p, c, q1, q2) <= r2 || triangle_dist2(p, c, q2, q3) <= r2
            });
        }
    }

    let p = cfg.pitch as f64;
    let mut labels = vec![0u32; marked.len()];
    for (idx, _) in marked.iter().enumerate().filter(|(_, &m)| m) {
        let ijk = [idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])];
        let pt = ijk.map(|c| c as f64);
        let base = [0, 1, 2].map(|a| (pt[a] / p).round() as i64);
        let span = |a: usize| {
            let lo = (base[a] - 2).max(0) as usize;
            let hi = ((base[a] + 2) as usize).min(max_s[a]);
            lo..=hi
        };
        let mut best = (f64::INFINITY, [0usize; 3]);
        for c in span(2) {
            for b in span(1) {
                for a in span(0) {
                    let d = dist2(pt, verts.pos[verts.index([a, b, c])]);
                    if d < best.0 {
                        best = (d, [a, b, c]);
                    }
                }
            }
        }
        if verts.is_real(best.1) {
            labels[idx] = verts.label(best.1);
        }
    }

    let h = cfg.spacing;
    let spec = GridSpec::new(dims, [h; 3], [0.0; 3]).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let volume = LabeledVolume::new(spec, labels).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let real: Vec<[usize; 3]> = verts.all().filter(|&s| verts.is_real(s)).collect();
    let nodes = real.iter().map(|&s| verts.pos[verts.index(s)].map(|c| c * h)).collect();
    let mut edges = Vec::new();
    for &s in &real {
        for d in unit {
            let t = step(s, d);
            if verts.is_real(t) {
                let (i, j) = (verts.label(s) as usize - 1, verts.label(t) as usize - 1);
                edges.push((i.min(j), i.max(j)));
            }
        }
    }
    edges.sort_unstable();
    Ok(GraphLattice { volume, nodes, edges, void_count: cfg.cells.iter().product() })
}
