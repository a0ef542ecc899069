//! Packed ellipsoid lattice on a fixed physical domain.
//!
//! The domain is a cube of side `base_n` (physical units) split into
//! `layout` equal boxes, one axis-aligned ellipsoid centered in each. Only the
//! voxel sampling changes with `nx`; the geometry stays put.

use super::SynthError;
use crate::vec3::Point3;
use crate::volume::{fmt_f64, GridSpec, LabeledVolume};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipsoidLatticeConfig {
    pub nx: usize,
    pub layout: [usize; 3],
    /// Semi-axes as fractions of the per-axis pitch.
    pub semi_axes: [f64; 3],
    pub base_n: f64,
}

impl Default for EllipsoidLatticeConfig {
    fn default() -> Self {
        Self { nx: 240, layout: [5, 4, 3], semi_axes: [0.45, 0.40, 0.35], base_n: 240.0 }
    }
}

impl EllipsoidLatticeConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.nx < 8 {
            return bad(format!("nx must be >= 8, got {}", self.nx));
        }
        if self.layout.contains(&0) {
            return bad(format!("layout counts must be >= 1, got {:?}", self.layout));
        }
        if !(self.base_n.is_finite() && self.base_n > 0.0) {
            return bad(format!("base_n must be > 0, got {}", self.base_n));
        }
        for &f in &self.semi_axes {
            if !(f.is_finite() && f > 0.0) {
                return bad(format!("semi-axis fractions must be > 0, got {f}"));
            }
            if f > 0.5 {
                return Err(SynthError::Overlap(f));
            }
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.base_n / self.nx as f64
    }

    pub fn pitch(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.base_n / self.layout[a] as f64)
    }

    pub fn object_count(&self) -> usize {
        self.layout.iter().product()
    }
}

/// Analytic description of one generated object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectTruth {
    pub id: u32,
    pub center: Point3,
    pub semi_axes: [f64; 3],
    pub volume: f64,
}

#[derive(Debug, Clone)]
pub struct EllipsoidLattice {
    pub volume: LabeledVolume,
    pub truth: Vec<ObjectTruth>,
}

impl EllipsoidLattice {
    /// CSV `id,cx,cy,cz,V_true`.
    pub fn write_truth_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "cx", "cy", "cz", "V_true"])?;
        for t in &self.truth {
            w.write_record([
                t.id.to_string(),
                fmt_f64(t.center[0]),
                fmt_f64(t.center[1]),
                fmt_f64(t.center[2]),
                fmt_f64(t.volume),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn objects(cfg: &EllipsoidLatticeConfig) -> Vec<ObjectTruth> {
    let pitch = cfg.pitch();
    let r = [0, 1, 2].map(|a| cfg.semi_axes[a] * pitch[a]);
    let [lx, ly, lz] = cfg.layout;
    let mut out = Vec::with_capacity(cfg.object_count());
    for cz in 0..lz {
        for cy in 0..ly {
            for cx in 0..lx {
                let c = [cx, cy, cz];
                out.push(ObjectTruth {
                    id: out.len() as u32 + 1,
                    center: [0, 1, 2].map(|a| (c[a] as f64 + 0.5) * pitch[a]),
                    semi_axes: r,
                    volume: 4.0 / 3.0 * PI * r[0] * r[1] * r[2],
                });
            }
        }
    }
    out
}

/// Labels every voxel whose center lies inside ellipsoid `k` with `k`.
pub fn generate_ellipsoid_lattice(cfg: &EllipsoidLatticeConfig) -> Result<EllipsoidLattice, SynthError> {
    cfg.validate()?;
    let n = cfg.nx;
    let h = cfg.spacing();
    let spec = GridSpec::new([n; 3], [h; 3], [0.5 * h; 3])
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let truth = objects(cfg);
    let pitch = cfg.pitch();
    let [lx, ly, _] = cfg.layout;
    // Voxel-center coordinate and owning box along each axis.
    let axis_cells: Vec<Vec<(f64, usize)>> = (0..3)
        .map(|a| {
            (0..n)
                .map(|i| {
                    let x = (i as f64 + 0.5) * h;
                    (x, ((x / pitch[a]) as usize).min(cfg.layout[a] - 1))
                })
                .collect()
        })
        .collect();
    let mut labels = vec![0u32; spec.len()];
    let mut idx = 0;
    for &(z, cz) in &axis_cells[2] {
        for &(y, cy) in &axis_cells[1] {
            for &(x, cx) in &axis_cells[0] {
                let t = &truth[cx + lx * (cy + ly * cz)];
                let u = (x - t.center[0]) / t.semi_axes[0];
                let v = (y - t.center[1]) / t.semi_axes[1];
                let w = (z - t.center[2]) / t.semi_axes[2];
                if u * u + v * v + w * w <= 1.0 {
                    labels[idx] = t.id;
                }
                idx += 1;
            }
        }
    }
    let volume = LabeledVolume::new(spec, labels).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    Ok(EllipsoidLattice { volume, truth })
}

/// Voxel-count measurement of one labelled object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelObject {
    pub id: u32,
    pub voxels: usize,
    /// Mean voxel center.
    pub center: Point3,
    /// `voxels * voxel volume`.
    pub volume: f64,
}

/// Count and mean center of every instance, in ascending label order.
pub fn measure_objects(v: &LabeledVolume) -> Vec<VoxelObject> {
    let max = v.labels().iter().copied().max().unwrap_or(0) as usize;
    let mut count = vec![0usize; max + 1];
    let mut sum = vec![[0.0f64; 3]; max + 1];
    let [nx, ny, nz] = v.spec.dims;
    let labels = v.labels();
    let mut idx = 0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let l = labels[idx] as usize;
                idx += 1;
                if l != 0 {
                    count[l] += 1;
                    let s = &mut sum[l];
                    s[0] += i as f64;
                    s[1] += j as f64;
                    s[2] += k as f64;
                }
            }
        }
    }
    let vv = v.spec.voxel_volume();
    (1..=max)
        .filter(|&l| count[l] > 0)
        .map(|l| {
            let c = count[l] as f64;
            let mean = [0, 1, 2].map(|a| sum[l][a] / c);
            VoxelObject {
                id: l as u32,
                voxels: count[l],
                center: [0, 1, 2].map(|a| v.spec.origin[a] + mean[a] * v.spec.spacing[a]),
                volume: c * vv,
            }
        })
        .collect()
}
