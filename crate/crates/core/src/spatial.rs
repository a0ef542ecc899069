//! Exact nearest-neighbour queries over static 3D point sets.
//!
//! The tree splits at the median of the axis with the widest spread and stops
//! at leaves of at most [`LEAF_SIZE`] points. Distances stay squared until the
//! public boundary.

use crate::vec3::{dist2, Point3};
use thiserror::Error;

pub const LEAF_SIZE: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum SpatialError {
    #[error("cannot index an empty point set")]
    Empty,
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Point3>,
    nodes: Vec<Node>,
}

/// Work done by one query, for cost accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryCost {
    pub nodes_visited: usize,
    pub points_tested: usize,
}

impl PointIndex {
    pub fn build(points: &[Point3]) -> Result<Self, SpatialError> {
        if points.is_empty() {
            return Err(SpatialError::Empty);
        }
        if let Some(bad) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(SpatialError::NonFinite(bad));
        }
        let mut index = Self { points: points.to_vec(), nodes: Vec::new() };
        let n = index.points.len();
        index.build_node(0, n);
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let slice = &mut self.points[start..end];
        let mut lo = slice[0];
        let mut hi = slice[0];
        for p in slice.iter() {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap();
        if hi[axis] == lo[axis] {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |p, q| p[axis].total_cmp(&q[axis]));
        let value = slice[mid][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build_node(start, start + mid);
        let right = self.build_node(start + mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest Euclidean distance from `q` to any stored point.
    pub fn nearest_distance(&self, q: Point3) -> f64 {
        self.nearest_with_cost(q).0
    }

    pub fn nearest_with_cost(&self, q: Point3) -> (f64, QueryCost) {
        let mut best = f64::INFINITY;
        let mut cost = QueryCost::default();
        self.search(0, q, &mut best, &mut cost);
        (best.sqrt(), cost)
    }

    fn search(&self, node: usize, q: Point3, best: &mut f64, cost: &mut QueryCost) {
        cost.nodes_visited += 1;
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for p in &self.points[start..end] {
                    cost.points_tested += 1;
                    let d = dist2(*p, q);
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let delta = q[axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best, cost);
                if delta * delta <= *best {
                    self.search(far, q, best, cost);
                }
            }
        }
    }
}
