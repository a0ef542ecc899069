//! Incremental 3D convex hull.
//!
//! Starts from a maximal-volume-ish tetrahedron, then inserts each remaining
//! point: faces that see the point are removed and the horizon is re-capped.
//! Points within `1e-10 * diagonal` of the current hull are treated as inside.

use super::{CellError, TriMesh};
use crate::vec3::{cross, dist2, dot, norm, sub, Point3};
use std::collections::{HashMap, HashSet, VecDeque};

const DEGENERATE_REL: f64 = 1e-9;
const VISIBLE_REL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    normal: Point3,
    offset: f64,
    alive: bool,
}

impl Face {
    fn new(points: &[Point3], v: [usize; 3]) -> Self {
        let n = cross(sub(points[v[1]], points[v[0]]), sub(points[v[2]], points[v[0]]));
        let len = norm(n);
        let normal = if len > 0.0 { n.map(|c| c / len) } else { [0.0; 3] };
        Self { v, normal, offset: dot(normal, points[v[0]]), alive: true }
    }

    fn distance(&self, p: Point3) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Convex hull of `points`; also returns, per hull vertex, its input index.
pub fn convex_hull_indexed(points: &[Point3]) -> Result<(TriMesh, Vec<usize>), CellError> {
    if points.len() < 4 {
        return Err(CellError::Degenerate(format!("need >= 4 points, got {}", points.len())));
    }
    if points.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
        return Err(CellError::Degenerate("non-finite coordinate".into()));
    }
    let (lo, hi) = crate::vec3::bounds(points).unwrap();
    let diag = norm(sub(hi, lo));
    if diag == 0.0 {
        return Err(CellError::Degenerate("all points coincide".into()));
    }
    let seed = initial_simplex(points, diag)?;
    let eps = VISIBLE_REL * diag;

    let mut faces: Vec<Face> = Vec::new();
    let inner = [0, 1, 2].map(|a| seed.iter().map(|&s| points[s][a]).sum::<f64>() / 4.0);
    for tri in [[0, 1, 2], [0, 3, 1], [1, 3, 2], [2, 3, 0]] {
        let mut v = tri.map(|t| seed[t]);
        if Face::new(points, v).distance(inner) > 0.0 {
            v.swap(1, 2);
        }
        faces.push(Face::new(points, v));
    }
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, face) in faces.iter().enumerate() {
        for e in 0..3 {
            edge_face.insert((face.v[e], face.v[(e + 1) % 3]), f);
        }
    }

    let in_seed: HashSet<usize> = seed.iter().copied().collect();
    for p in (0..points.len()).filter(|p| !in_seed.contains(p)) {
        let pt = points[p];
        let Some(start) = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive)
            .map(|(i, f)| (i, f.distance(pt)))
            .filter(|&(_, d)| d > eps)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
        else {
            continue;
        };
        // Visible region grown across shared edges so the horizon is one loop.
        let mut visible = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            let v = faces[f].v;
            for e in 0..3 {
                let twin = edge_face[&(v[(e + 1) % 3], v[e])];
                if !visible.contains(&twin) && faces[twin].distance(pt) > eps {
                    visible.insert(twin);
                    queue.push_back(twin);
                }
            }
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                if !visible.contains(&edge_face[&(b, a)]) {
                    horizon.push((a, b));
                }
            }
        }
        let mut removed: Vec<usize> = visible.into_iter().collect();
        removed.sort_unstable();
        for f in removed {
            faces[f].alive = false;
            let v = faces[f].v;
            for e in 0..3 {
                edge_face.remove(&(v[e], v[(e + 1) % 3]));
            }
        }
        horizon.sort_unstable();
        for (a, b) in horizon {
            let id = faces.len();
            faces.push(Face::new(points, [a, b, p]));
            edge_face.insert((a, b), id);
            edge_face.insert((b, p), id);
            edge_face.insert((p, a), id);
        }
    }

    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut source = Vec::new();
    let mut mesh = TriMesh::default();
    for face in faces.iter().filter(|f| f.alive) {
        let tri = face.v.map(|v| {
            *remap.entry(v).or_insert_with(|| {
                source.push(v);
                mesh.vertices.push(points[v]);
                source.len() - 1
            })
        });
        mesh.faces.push(tri);
    }
    Ok((mesh, source))
}

/// Convex hull of at least four non-coplanar points.
pub fn convex_hull(points: &[Point3]) -> Result<TriMesh, CellError> {
    convex_hull_indexed(points).map(|(m, _)| m)
}

fn initial_simplex(points: &[Point3], diag: f64) -> Result<[usize; 4], CellError> {
    let tol = DEGENERATE_REL * diag;
    let far = |from: &dyn Fn(Point3) -> f64| {
        (0..points.len())
            .map(|i| (i, from(points[i])))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .unwrap()
    };
    let a = (0..points.len())
        .min_by(|&i, &j| points[i][0].total_cmp(&points[j][0]).then(i.cmp(&j)))
        .unwrap();
    let (b, _) = far(&|p| dist2(p, points[a]));
    let ab = sub(points[b], points[a]);
    let ab_len = norm(ab);
    let (c, line_dist) = far(&|p| norm(cross(ab, sub(p, points[a]))) / ab_len);
    if line_dist <= tol {
        return Err(CellError::Degenerate("points are collinear".into()));
    }
    let n = cross(ab, sub(points[c], points[a]));
    let n_len = norm(n);
    let (d, plane_dist) = far(&|p| (dot(n, sub(p, points[a])) / n_len).abs());
    if plane_dist <= tol {
        return Err(CellError::Degenerate("points are coplanar".into()));
    }
    Ok([a, b, c, d])
}
