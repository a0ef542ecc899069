//! Physical edge filters: label proximity and path occupancy.

use super::GraphError;
use crate::spatial::PointIndex;
use crate::vec3::{dist, lerp, Point3};
use crate::volume::{CentroidTable, LabeledVolume};
use std::collections::HashMap;

/// Fraction of `m = max(2, ceil(|q-p| / step) + 1)` evenly spaced samples on
/// `[p, q]` lying within `radius` of an indexed point.
pub fn hit_fraction(
    p: Point3,
    q: Point3,
    index: &PointIndex,
    step: f64,
    radius: f64,
) -> Result<f64, GraphError> {
    if !(step > 0.0 && radius > 0.0) {
        return Err(GraphError::InvalidParams(format!(
            "step and radius must be > 0, got {step} and {radius}"
        )));
    }
    if p == q {
        return Err(GraphError::DegenerateSegment);
    }
    let m = ((dist(p, q) / step).ceil() as usize + 1).max(2);
    let hits = (0..m)
        .filter(|&s| {
            let t = s as f64 / (m - 1) as f64;
            index.nearest_distance(lerp(p, q, t)) <= radius
        })
        .count();
    Ok(hits as f64 / m as f64)
}

/// Per-label indices over voxel centers, keyed by label.
pub type LabelIndices = HashMap<u32, PointIndex>;

/// Indices for every label listed in the centroid table.
pub fn build_label_indices(
    v: &LabeledVolume,
    table: &CentroidTable,
) -> Result<LabelIndices, GraphError> {
    let mut buckets: HashMap<u32, Vec<Point3>> =
        table.labels.iter().map(|&l| (l, Vec::new())).collect();
    for (idx, &l) in v.labels().iter().enumerate() {
        if let Some(bucket) = buckets.get_mut(&l) {
            bucket.push(v.spec.center_of(idx));
        }
    }
    buckets
        .into_iter()
        .map(|(l, pts)| {
            PointIndex::build(&pts).map(|i| (l, i)).map_err(|_| GraphError::MissingLabelIndex(l))
        })
        .collect()
}

/// Accepts the pair when either centroid lies within `tau` of the other
/// endpoint's labelled voxels.
pub fn cluster_gate(
    i: usize,
    j: usize,
    indices: &LabelIndices,
    table: &CentroidTable,
    tau: f64,
) -> Result<bool, GraphError> {
    let (li, lj) = (table.labels[i], table.labels[j]);
    let ki = indices.get(&li).ok_or(GraphError::MissingLabelIndex(li))?;
    let kj = indices.get(&lj).ok_or(GraphError::MissingLabelIndex(lj))?;
    let d = kj.nearest_distance(table.points[i]).min(ki.nearest_distance(table.points[j]));
    Ok(d <= tau)
}
