//! Voxel grids, instance labels and the per-instance centroid rule.
//!
//! Voxel `(i, j, k)` lives at flat index `i + nx * (j + ny * k)` (x fastest) and
//! its center sits at `origin + (i dx, j dy, k dz)`. Label `0` is background.

mod centroid;
mod components;
mod edt;
mod io;

pub use centroid::{centroid_table, dt_weighted_center, fmt_f64, lis_center, CentroidTable};
pub use components::{connected_components, label_components, Connectivity};
pub use edt::{label_edt, label_edt_squared};
pub use io::{load_volume, save_field, save_labels, volume_paths, Volume, VolumeHeader};

use crate::vec3::Point3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("payload length mismatch: header declares {expected} bytes, payload has {actual}")]
    PayloadLengthMismatch { expected: usize, actual: usize },
    #[error("unsupported dtype `{0}`")]
    UnsupportedDtype(String),
    #[error("corrupt header {path}: {reason}")]
    CorruptHeader { path: String, reason: String },
    #[error("label {0} not present in volume")]
    LabelAbsent(u32),
    #[error("volume has no nonzero instances")]
    NoInstances,
    #[error("expected a binary {{0,1}} volume, found label {0}")]
    NotBinary(u32),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, VolumeError>;

/// Shape, spacing and origin of a voxel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl GridSpec {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(VolumeError::InvalidGrid(format!("dims must be >= 1, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(VolumeError::InvalidGrid(format!(
                "spacing must be finite and > 0, got {spacing:?}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(VolumeError::InvalidGrid(format!("origin must be finite, got {origin:?}")));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| VolumeError::InvalidGrid("voxel count overflows".into()))?;
        Ok(Self { dims, spacing, origin })
    }

    /// Unit spacing, zero origin.
    pub fn unit(dims: [usize; 3]) -> Result<Self> {
        Self::new(dims, [1.0; 3], [0.0; 3])
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize, k: usize) -> Point3 {
        [
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
            self.origin[2] + k as f64 * self.spacing[2],
        ]
    }

    #[inline]
    pub fn center_of(&self, idx: usize) -> Point3 {
        let [i, j, k] = self.coords(idx);
        self.center(i, j, k)
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing[0].min(self.spacing[1]).min(self.spacing[2])
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// True when the voxel lies on one of the six faces of the grid.
    #[inline]
    pub fn on_boundary(&self, [i, j, k]: [usize; 3]) -> bool {
        i == 0
            || j == 0
            || k == 0
            || i + 1 == self.dims[0]
            || j + 1 == self.dims[1]
            || k + 1 == self.dims[2]
    }
}

/// Integer instance labels on a grid; `0` is background.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVolume {
    pub spec: GridSpec,
    labels: Vec<u32>,
}

impl LabeledVolume {
    pub fn new(spec: GridSpec, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != spec.len() {
            return Err(VolumeError::PayloadLengthMismatch {
                expected: spec.len() * 4,
                actual: labels.len() * 4,
            });
        }
        Ok(Self { spec, labels })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self { labels: vec![0; spec.len()], spec }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u32] {
        &mut self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        self.labels[self.spec.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, label: u32) {
        let idx = self.spec.index(i, j, k);
        self.labels[idx] = label;
    }

    /// Distinct nonzero labels in ascending order.
    pub fn instance_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn contains_label(&self, id: u32) -> bool {
        id != 0 && self.labels.contains(&id)
    }

    /// Physical centers of every voxel carrying `id`, in scan order.
    pub fn voxel_centers(&self, id: u32) -> Vec<Point3> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == id)
            .map(|(idx, _)| self.spec.center_of(idx))
            .collect()
    }

    /// Physical centers of every nonzero voxel, in scan order.
    pub fn foreground_centers(&self) -> Vec<Point3> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0)
            .map(|(idx, _)| self.spec.center_of(idx))
            .collect()
    }
}

/// Real-valued field on a grid (pressure traces, distance maps).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(VolumeError::PayloadLengthMismatch {
                expected: spec.len() * 4,
                actual: values.len() * 4,
            });
        }
        Ok(Self { spec, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.spec.index(i, j, k)]
    }
}

/// Binary labels: `1` wherever `value >= t`.
pub fn threshold_field(field: &ScalarField, t: f64) -> Result<LabeledVolume> {
    if !t.is_finite() {
        return Err(VolumeError::InvalidGrid(format!("threshold must be finite, got {t}")));
    }
    let labels = field.values.iter().map(|&v| u32::from(v >= t)).collect();
    LabeledVolume::new(field.spec, labels)
}
