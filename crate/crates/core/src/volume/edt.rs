//! Exact per-label Euclidean distance transform.
//!
//! Squared distances are built with three separable lower-envelope passes
//! (x, then y, then z) over the label's bounding box padded by one voxel. The
//! padding layer is always non-label: either another label, background, or
//! the virtual background one spacing beyond a grid face. Any voxel outside the
//! padded box is no closer than its projection onto the box, so the crop is
//! exact.

use super::{LabeledVolume, Result, ScalarField, VolumeError};

/// Inclusive bounding box of a label in grid indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LabelBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl LabelBox {
    fn single(at: [usize; 3]) -> Self {
        Self { lo: at, hi: at }
    }

    fn grow(&mut self, at: [usize; 3]) {
        for a in 0..3 {
            self.lo[a] = self.lo[a].min(at[a]);
            self.hi[a] = self.hi[a].max(at[a]);
        }
    }
}

/// Bounding boxes of every nonzero label, ascending by label.
pub(crate) fn label_boxes(v: &LabeledVolume) -> Vec<(u32, LabelBox)> {
    let mut boxes: std::collections::BTreeMap<u32, LabelBox> = Default::default();
    let [nx, ny, nz] = v.spec.dims;
    let labels = v.labels();
    let mut idx = 0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let l = labels[idx];
                idx += 1;
                if l == 0 {
                    continue;
                }
                boxes
                    .entry(l)
                    .and_modify(|b| b.grow([i, j, k]))
                    .or_insert_with(|| LabelBox::single([i, j, k]));
            }
        }
    }
    boxes.into_iter().collect()
}

pub(crate) fn label_box(v: &LabeledVolume, id: u32) -> Option<LabelBox> {
    let mut found: Option<LabelBox> = None;
    for (idx, &l) in v.labels().iter().enumerate() {
        if l == id {
            let at = v.spec.coords(idx);
            match found.as_mut() {
                Some(b) => b.grow(at),
                None => found = Some(LabelBox::single(at)),
            }
        }
    }
    found
}

/// Squared distances over a padded crop. Crop voxel `c` maps to grid index
/// `lo + c - 1`.
pub(crate) struct CropDistance {
    pub lo: [usize; 3],
    pub dims: [usize; 3],
    pub sq: Vec<f64>,
}

impl CropDistance {
    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    /// Iterates `(grid index triple, squared distance)` for label voxels.
    pub fn label_voxels<'a>(
        &'a self,
        v: &'a LabeledVolume,
        id: u32,
        bbox: LabelBox,
    ) -> impl Iterator<Item = ([usize; 3], f64)> + 'a {
        let [lo, hi] = [bbox.lo, bbox.hi];
        (lo[2]..=hi[2]).flat_map(move |k| {
            (lo[1]..=hi[1]).flat_map(move |j| {
                (lo[0]..=hi[0]).filter_map(move |i| {
                    if v.get(i, j, k) != id {
                        return None;
                    }
                    let c = [i + 1 - self.lo[0], j + 1 - self.lo[1], k + 1 - self.lo[2]];
                    Some(([i, j, k], self.sq[self.index(c)]))
                })
            })
        })
    }
}

pub(crate) fn crop_distance(v: &LabeledVolume, id: u32, bbox: LabelBox) -> CropDistance {
    let spec = &v.spec;
    let dims = [
        bbox.hi[0] - bbox.lo[0] + 3,
        bbox.hi[1] - bbox.lo[1] + 3,
        bbox.hi[2] - bbox.lo[2] + 3,
    ];
    let mut sq = vec![0.0; dims[0] * dims[1] * dims[2]];
    for ck in 0..dims[2] {
        for cj in 0..dims[1] {
            for ci in 0..dims[0] {
                let g = [
                    (bbox.lo[0] + ci) as i64 - 1,
                    (bbox.lo[1] + cj) as i64 - 1,
                    (bbox.lo[2] + ck) as i64 - 1,
                ];
                let inside = (0..3).all(|a| g[a] >= 0 && (g[a] as usize) < spec.dims[a]);
                let is_label =
                    inside && v.get(g[0] as usize, g[1] as usize, g[2] as usize) == id;
                if is_label {
                    sq[ci + dims[0] * (cj + dims[1] * ck)] = f64::INFINITY;
                }
            }
        }
    }
    let weights = spec.spacing.map(|s| s * s);
    for axis in 0..3 {
        transform_axis(&mut sq, dims, axis, weights[axis]);
    }
    CropDistance { lo: bbox.lo, dims, sq }
}

fn transform_axis(data: &mut [f64], dims: [usize; 3], axis: usize, weight: f64) {
    let n = dims[axis];
    let stride = match axis {
        0 => 1,
        1 => dims[0],
        _ => dims[0] * dims[1],
    };
    let (oa, ob) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut envelope = Envelope::with_capacity(n);
    for b in 0..dims[ob] {
        for a in 0..dims[oa] {
            let mut c = [0usize; 3];
            c[oa] = a;
            c[ob] = b;
            let base = c[0] + dims[0] * (c[1] + dims[1] * c[2]);
            for (p, slot) in line.iter_mut().enumerate() {
                *slot = data[base + p * stride];
            }
            envelope.transform(&line, weight, &mut out);
            for (p, &val) in out.iter().enumerate() {
                data[base + p * stride] = val;
            }
        }
    }
}

/// Lower envelope of parabolas `f(q) + w (p - q)^2`.
struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Self { sites: Vec::with_capacity(n), bounds: Vec::with_capacity(n + 1) }
    }

    fn transform(&mut self, f: &[f64], w: f64, out: &mut [f64]) {
        self.sites.clear();
        self.bounds.clear();
        for (q, &fq) in f.iter().enumerate() {
            if !fq.is_finite() {
                continue;
            }
            let hq = fq + w * (q * q) as f64;
            loop {
                let Some(&r) = self.sites.last() else {
                    self.sites.push(q);
                    self.bounds.push(f64::NEG_INFINITY);
                    break;
                };
                let hr = f[r] + w * (r * r) as f64;
                let s = (hq - hr) / (2.0 * w * (q - r) as f64);
                let zk = *self.bounds.last().unwrap();
                // Near-ties keep both parabolas; evaluation below takes the
                // true minimum over neighbouring sites.
                if self.sites.len() > 1 && s < zk - 1e-9 * s.abs().max(1.0) {
                    self.sites.pop();
                    self.bounds.pop();
                } else {
                    self.sites.push(q);
                    self.bounds.push(s);
                    break;
                }
            }
        }
        if self.sites.is_empty() {
            out.fill(f64::INFINITY);
            return;
        }
        let m = self.sites.len();
        let mut k = 0;
        for (p, slot) in out.iter_mut().enumerate() {
            let pf = p as f64;
            while k + 1 < m && self.bounds[k + 1] < pf {
                k += 1;
            }
            let mut best = f64::INFINITY;
            for t in k.saturating_sub(2)..(k + 3).min(m) {
                let q = self.sites[t];
                let d = pf - q as f64;
                let val = f[q] + w * (d * d);
                if val < best {
                    best = val;
                }
            }
            *slot = best;
        }
    }
}

/// Squared distance from each voxel of `id` to the nearest non-`id` voxel
/// center; `0` elsewhere.
pub fn label_edt_squared(v: &LabeledVolume, id: u32) -> Result<ScalarField> {
    let bbox = label_box(v, id).filter(|_| id != 0).ok_or(VolumeError::LabelAbsent(id))?;
    let crop = crop_distance(v, id, bbox);
    let mut values = vec![0.0; v.spec.len()];
    for ([i, j, k], sq) in crop.label_voxels(v, id, bbox) {
        values[v.spec.index(i, j, k)] = sq;
    }
    ScalarField::new(v.spec, values)
}

/// Euclidean distance (physical units) from each voxel of `id` to the nearest
/// voxel center not carrying `id`; out-of-grid voxels count as background.
pub fn label_edt(v: &LabeledVolume, id: u32) -> Result<ScalarField> {
    let sq = label_edt_squared(v, id)?;
    let values = sq.values().iter().map(|s| s.sqrt()).collect();
    ScalarField::new(v.spec, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::GridSpec;

    #[test]
    fn isolated_voxel_has_unit_distance() {
        let mut v = LabeledVolume::zeros(GridSpec::unit([5, 5, 5]).unwrap());
        v.set(2, 2, 2, 4);
        let d = label_edt(&v, 4).unwrap();
        assert_eq!(d.get(2, 2, 2), 1.0);
        assert_eq!(d.values().iter().filter(|&&x| x != 0.0).count(), 1);
    }

    #[test]
    fn centered_cube() {
        let mut v = LabeledVolume::zeros(GridSpec::unit([5, 5, 5]).unwrap());
        for k in 1..4 {
            for j in 1..4 {
                for i in 1..4 {
                    v.set(i, j, k, 1);
                }
            }
        }
        let d = label_edt(&v, 1).unwrap();
        assert_eq!(d.get(2, 2, 2), 2.0);
        assert_eq!(d.get(1, 2, 2), 1.0);
        assert_eq!(d.get(2, 3, 2), 1.0);
        assert_eq!(d.get(1, 1, 1), 1.0);
    }

    #[test]
    fn grid_edge_counts_as_background() {
        let spec = GridSpec::new([3, 1, 1], [2.0, 1.0, 1.0], [0.0; 3]).unwrap();
        let v = LabeledVolume::new(spec, vec![1, 1, 1]).unwrap();
        let d = label_edt(&v, 1).unwrap();
        // y/z faces are one unit away, x neighbours two.
        assert_eq!(d.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn anisotropic_spacing_picks_the_short_axis() {
        let spec = GridSpec::new([7, 7, 7], [3.0, 0.5, 2.0], [0.0; 3]).unwrap();
        let mut v = LabeledVolume::zeros(spec);
        for k in 2..5 {
            for j in 1..6 {
                for i in 2..5 {
                    v.set(i, j, k, 2);
                }
            }
        }
        let d = label_edt(&v, 2).unwrap();
        // distance along y from the middle row is 3 voxels * 0.5
        assert_eq!(d.get(3, 3, 3), 1.5);
    }

    #[test]
    fn other_labels_are_not_the_label() {
        let spec = GridSpec::unit([4, 1, 1]).unwrap();
        let v = LabeledVolume::new(spec, vec![1, 1, 2, 2]).unwrap();
        let d = label_edt(&v, 1).unwrap();
        assert_eq!(d.values(), &[1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn absent_label_errors() {
        let v = LabeledVolume::zeros(GridSpec::unit([2, 2, 2]).unwrap());
        assert!(matches!(label_edt(&v, 1), Err(VolumeError::LabelAbsent(1))));
        assert!(matches!(label_edt(&v, 0), Err(VolumeError::LabelAbsent(0))));
    }
}
