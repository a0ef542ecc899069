use super::CellError;
use crate::vec3::{cross, dot, Point3};
use std::collections::HashMap;
use std::io::Write;

/// Closed triangulated surface with outward-facing triangles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Every undirected edge is shared by exactly two faces that traverse it
    /// in opposite directions.
    pub fn check_closed_manifold(&self) -> Result<(), CellError> {
        if self.faces.is_empty() {
            return Err(CellError::OpenMesh("mesh has no faces".into()));
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, tri) in self.faces.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) {
                return Err(CellError::OpenMesh(format!("face {f} indexes a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(CellError::OpenMesh(format!("face {f} is degenerate")));
            }
            for e in 0..3 {
                let key = (tri[e], tri[(e + 1) % 3]);
                if directed.insert(key, f).is_some() {
                    return Err(CellError::OpenMesh(format!("edge {key:?} used twice in one direction")));
                }
            }
        }
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                return Err(CellError::OpenMesh(format!("edge ({a}, {b}) has no opposite face")));
            }
        }
        Ok(())
    }

    /// Sum of `v0 . (v1 x v2) / 6` over faces.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                dot(self.vertices[a], cross(self.vertices[b], self.vertices[c]))
            })
            .sum::<f64>()
            / 6.0
    }

    /// ASCII triangle list: `v x y z` lines, then `f i j k` with 1-based indices.
    pub fn write_tri<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
        }
        for f in &self.faces {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v.map(|c| c * s)).collect(),
            faces: self.faces.clone(),
        }
    }
}

/// Enclosed volume via the divergence theorem.
pub fn mesh_volume(m: &TriMesh) -> Result<f64, CellError> {
    m.check_closed_manifold()?;
    Ok(m.signed_volume().abs())
}

/// Per-axis vertex span `(L_x, L_y, L_z)`.
pub fn axis_extents(m: &TriMesh) -> Result<[f64; 3], CellError> {
    let (lo, hi) = crate::vec3::bounds(&m.vertices).ok_or(CellError::EmptyMesh)?;
    Ok([hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]])
}

/// `(L_x/L_y, L_x/L_z, L_y/L_z)`.
pub fn aspect_ratios(extents: [f64; 3]) -> Result<[f64; 3], CellError> {
    let [lx, ly, lz] = extents;
    if extents.iter().any(|&l| !(l > 0.0)) {
        return Err(CellError::ZeroExtent(extents));
    }
    Ok([lx / ly, lx / lz, ly / lz])
}
