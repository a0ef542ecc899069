//! Directional lattice-graph construction over instance centroids.
//!
//! Each root proposes edges only forward along the propagation axis: a
//! candidate must strictly advance in axial bins, stay within `max_axial_span`
//! bins and within `max_lateral_offset` lateral bins (L1). Candidates are ranked
//! by axial separation, then lateral distance, then node index, truncated to the
//! beam width, and accepted greedily under a per-node degree cap. Optional
//! gates reject edges whose endpoints are not backed by labelled voxels.

mod gates;

pub use gates::{build_label_indices, cluster_gate, hit_fraction, LabelIndices};

use crate::spatial::PointIndex;
use crate::vec3::dist;
use crate::volume::{fmt_f64, CentroidTable, LabeledVolume};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph parameters: {0}")]
    InvalidParams(String),
    #[error("gates are enabled but no labelled volume was supplied")]
    GateWithoutVolume,
    #[error("no voxel index for label {0}")]
    MissingLabelIndex(u32),
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("centroid table is empty")]
    NoNodes,
}

/// Propagation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "+X")]
    PosX,
    #[serde(rename = "-X")]
    NegX,
    #[serde(rename = "+Y")]
    PosY,
    #[serde(rename = "-Y")]
    NegY,
    #[serde(rename = "+Z")]
    PosZ,
    #[serde(rename = "-Z")]
    NegZ,
}

impl Axis {
    pub const ALL: [Axis; 6] =
        [Axis::PosX, Axis::NegX, Axis::PosY, Axis::NegY, Axis::PosZ, Axis::NegZ];

    /// Coordinate index of the axial direction.
    pub fn axial(self) -> usize {
        match self {
            Axis::PosX | Axis::NegX => 0,
            Axis::PosY | Axis::NegY => 1,
            Axis::PosZ | Axis::NegZ => 2,
        }
    }

    /// The two lateral coordinate indices, ascending.
    pub fn lateral(self) -> (usize, usize) {
        match self.axial() {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Axis::PosX | Axis::PosY | Axis::PosZ => 1,
            _ => -1,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::PosX => "+X",
            Axis::NegX => "-X",
            Axis::PosY => "+Y",
            Axis::NegY => "-Y",
            Axis::PosZ => "+Z",
            Axis::NegZ => "-Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Axis {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, GraphError> {
        Axis::ALL
            .into_iter()
            .find(|a| a.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GraphError::InvalidParams(format!("unknown axis `{s}`")))
    }
}

/// How axial separation is measured when ranking candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxialMetric {
    /// `|A_j - A_i|` in bins.
    BinUnits,
    /// `(C_j - C_i) . d` in physical units.
    #[default]
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterGate {
    pub tau: f64,
}

/// Occupancy gate; step and radius are multiples of the minimum grid spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetweenGate {
    pub step_vox: f64,
    pub radius_vox: f64,
    pub min_hit_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphParams {
    pub axis: Axis,
    /// Further propagation axes, each run as its own pass (plus its reverse
    /// when enabled) after `axis`, sharing degree counters and the edge set.
    pub extra_axes: Vec<Axis>,
    pub bin_grids: [f64; 3],
    pub max_axial_span: i64,
    pub max_lateral_offset: i64,
    pub beam_width: usize,
    pub max_degree: usize,
    pub reverse_pass: bool,
    pub cluster_gate: Option<ClusterGate>,
    pub between_gate: Option<BetweenGate>,
    pub axial_metric: AxialMetric,
}

impl GraphParams {
    /// Shipped defaults, with the proximity threshold tied to `min_spacing`.
    pub fn defaults(bin_grids: [f64; 3], min_spacing: f64) -> Self {
        Self {
            axis: Axis::PosX,
            extra_axes: Vec::new(),
            bin_grids,
            max_axial_span: 3,
            max_lateral_offset: 2,
            beam_width: 4,
            max_degree: 6,
            reverse_pass: true,
            cluster_gate: Some(ClusterGate { tau: 2.0 * min_spacing }),
            between_gate: Some(BetweenGate { step_vox: 0.5, radius_vox: 1.5, min_hit_fraction: 0.6 }),
            axial_metric: AxialMetric::Continuous,
        }
    }

    /// Same parameters with both gates disabled.
    pub fn ungated(mut self) -> Self {
        self.cluster_gate = None;
        self.between_gate = None;
        self
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |m: String| Err(GraphError::InvalidParams(m));
        if self.bin_grids.iter().any(|&u| !(u.is_finite() && u > 0.0)) {
            return bad(format!("bin grids must be > 0, got {:?}", self.bin_grids));
        }
        if self.max_axial_span < 1 {
            return bad(format!("A_max must be >= 1, got {}", self.max_axial_span));
        }
        if self.max_lateral_offset < 0 {
            return bad(format!("R_side must be >= 0, got {}", self.max_lateral_offset));
        }
        if self.beam_width < 1 {
            return bad("K must be >= 1".into());
        }
        if self.max_degree < 1 {
            return bad("deg_max must be >= 1".into());
        }
        if let Some(g) = self.cluster_gate {
            if !(g.tau.is_finite() && g.tau > 0.0) {
                return bad(format!("tau must be > 0, got {}", g.tau));
            }
        }
        if let Some(g) = self.between_gate {
            if !(g.step_vox > 0.0 && g.radius_vox > 0.0) {
                return bad("s_vox and r_vox must be > 0".into());
            }
            if !(0.0..=1.0).contains(&g.min_hit_fraction) {
                return bad(format!("phi_min must lie in [0, 1], got {}", g.min_hit_fraction));
            }
        }
        Ok(())
    }

    fn gates_enabled(&self) -> bool {
        self.cluster_gate.is_some() || self.between_gate.is_some()
    }
}

/// Per-node bin indices and their axial/lateral projection for one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinCoords {
    /// `(I, J, K_bin)` per node.
    pub ijk: Vec<[i64; 3]>,
    pub axial: Vec<i64>,
    pub lat_u: Vec<i64>,
    pub lat_v: Vec<i64>,
    pub sign: i64,
}

/// `floor((x - x_min) / u)` per axis, with `x_min` the minimum over all nodes.
pub fn bin_coords(table: &CentroidTable, grids: [f64; 3], axis: Axis) -> BinCoords {
    let mut min = [f64::INFINITY; 3];
    for p in &table.points {
        for a in 0..3 {
            min[a] = min[a].min(p[a]);
        }
    }
    let ijk: Vec<[i64; 3]> = table
        .points
        .iter()
        .map(|p| [0, 1, 2].map(|a| ((p[a] - min[a]) / grids[a]).floor() as i64))
        .collect();
    project_bins(ijk, axis)
}

fn project_bins(ijk: Vec<[i64; 3]>, axis: Axis) -> BinCoords {
    let ax = axis.axial();
    let (u, v) = axis.lateral();
    BinCoords {
        axial: ijk.iter().map(|b| b[ax]).collect(),
        lat_u: ijk.iter().map(|b| b[u]).collect(),
        lat_v: ijk.iter().map(|b| b[v]).collect(),
        sign: axis.sign(),
        ijk,
    }
}

/// Undirected edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    pub nodes: CentroidTable,
    pub edges: Vec<Edge>,
    pub degree: Vec<usize>,
}

impl LatticeGraph {
    /// Adjacency lists in edge order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    /// CSV `i,j,length`.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "length"])?;
        for e in &self.edges {
            w.write_record([e.i.to_string(), e.j.to_string(), fmt_f64(e.length)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `node,degree`.
    pub fn write_degrees_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "degree"])?;
        for (n, d) in self.degree.iter().enumerate() {
            w.write_record([n.to_string(), d.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rebuilds a graph from a centroid table and an edge CSV.
    pub fn from_edges_csv<R: std::io::Read>(
        nodes: CentroidTable,
        input: R,
    ) -> Result<Self, GraphError> {
        let mut r = csv::Reader::from_reader(input);
        let mut edges = Vec::new();
        let mut degree = vec![0; nodes.len()];
        for row in r.deserialize() {
            let (i, j, length): (usize, usize, f64) =
                row.map_err(|e| GraphError::InvalidParams(format!("edge csv: {e}")))?;
            if i >= j || j >= nodes.len() {
                return Err(GraphError::InvalidParams(format!("bad edge ({i}, {j})")));
            }
            degree[i] += 1;
            degree[j] += 1;
            edges.push(Edge { i, j, length });
        }
        Ok(Self { nodes, edges, degree })
    }
}

struct GateContext {
    labels: Option<(LabelIndices, f64)>,
    occupancy: Option<(PointIndex, f64, f64, f64)>,
}

impl GateContext {
    fn build(
        table: &CentroidTable,
        volume: Option<&LabeledVolume>,
        params: &GraphParams,
    ) -> Result<Self, GraphError> {
        if !params.gates_enabled() {
            return Ok(Self { labels: None, occupancy: None });
        }
        let v = volume.ok_or(GraphError::GateWithoutVolume)?;
        let labels = match params.cluster_gate {
            Some(g) => Some((build_label_indices(v, table)?, g.tau)),
            None => None,
        };
        let occupancy = match params.between_gate {
            Some(g) => {
                let fg = v.foreground_centers();
                let index = PointIndex::build(&fg).map_err(|_| GraphError::GateWithoutVolume)?;
                let h = v.spec.min_spacing();
                Some((index, g.step_vox * h, g.radius_vox * h, g.min_hit_fraction))
            }
            None => None,
        };
        Ok(Self { labels, occupancy })
    }

    fn accepts(&self, table: &CentroidTable, i: usize, j: usize) -> Result<bool, GraphError> {
        if let Some((indices, tau)) = &self.labels {
            if !cluster_gate(i, j, indices, table, *tau)? {
                return Ok(false);
            }
        }
        if let Some((index, step, radius, phi_min)) = &self.occupancy {
            let phi = hit_fraction(table.points[i], table.points[j], index, *step, *radius)?;
            if phi < *phi_min {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

struct Candidate {
    node: usize,
    axial: f64,
    lateral: f64,
}

/// Builds the lattice graph. `volume` is required when a gate is enabled.
pub fn build_graph(
    table: &CentroidTable,
    volume: Option<&LabeledVolume>,
    params: &GraphParams,
) -> Result<LatticeGraph, GraphError> {
    params.validate()?;
    let n = table.len();
    if n == 0 {
        return Err(GraphError::NoNodes);
    }
    let gates = GateContext::build(table, volume, params)?;
    let ijk = bin_coords(table, params.bin_grids, params.axis).ijk;

    let mut degree = vec![0usize; n];
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::new();
    let cap = params.max_degree;

    let axes = std::iter::once(params.axis).chain(params.extra_axes.iter().copied());
    for axis in axes {
        let bins = project_bins(ijk.clone(), axis);
        let mut passes = vec![pass_order(&bins, false)];
        if params.reverse_pass {
            passes.push(pass_order(&bins, true));
        }
        for order in passes {
            for &i in &order {
                if degree[i] >= cap {
                    continue;
                }
                let shortlist = rank_candidates(table, &bins, axis, params, i);
                for c in shortlist {
                    let j = c.node;
                    if degree[i] >= cap || degree[j] >= cap {
                        continue;
                    }
                    let key = (i.min(j), i.max(j));
                    if seen.contains(&key) {
                        continue;
                    }
                    if !gates.accepts(table, i, j)? {
                        continue;
                    }
                    edges.push(Edge {
                        i: key.0,
                        j: key.1,
                        length: dist(table.points[i], table.points[j]),
                    });
                    seen.insert(key);
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
    }
    Ok(LatticeGraph { nodes: table.clone(), edges, degree })
}

/// Nodes sorted by `(sgn * A, U, V, index)`, axial key descending on reverse.
fn pass_order(bins: &BinCoords, reverse: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bins.axial.len()).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (bins.sign * bins.axial[a], bins.sign * bins.axial[b]);
        let axial = if reverse { kb.cmp(&ka) } else { ka.cmp(&kb) };
        axial
            .then(bins.lat_u[a].cmp(&bins.lat_u[b]))
            .then(bins.lat_v[a].cmp(&bins.lat_v[b]))
            .then(a.cmp(&b))
    });
    order
}

fn rank_candidates(
    table: &CentroidTable,
    bins: &BinCoords,
    axis: Axis,
    params: &GraphParams,
    i: usize,
) -> Vec<Candidate> {
    let ax = axis.axial();
    let (u, v) = axis.lateral();
    let sgn = bins.sign;
    let pi = table.points[i];
    let mut out: Vec<Candidate> = (0..table.len())
        .filter(|&j| j != i)
        .filter_map(|j| {
            let da = bins.axial[j] - bins.axial[i];
            let lateral_bins =
                (bins.lat_u[j] - bins.lat_u[i]).abs() + (bins.lat_v[j] - bins.lat_v[i]).abs();
            if sgn * da <= 0 || da.abs() > params.max_axial_span || lateral_bins > params.max_lateral_offset {
                return None;
            }
            let pj = table.points[j];
            let axial = match params.axial_metric {
                AxialMetric::BinUnits => da.abs() as f64,
                AxialMetric::Continuous => sgn as f64 * (pj[ax] - pi[ax]),
            };
            let lateral = ((pj[u] - pi[u]).powi(2) + (pj[v] - pi[v]).powi(2)).sqrt();
            Some(Candidate { node: j, axial, lateral })
        })
        .collect();
    out.sort_by(|a, b| {
        a.axial
            .total_cmp(&b.axial)
            .then(a.lateral.total_cmp(&b.lateral))
            .then(a.node.cmp(&b.node))
    });
    out.truncate(params.beam_width);
    out
}
