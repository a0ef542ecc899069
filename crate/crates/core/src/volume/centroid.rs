use super::edt::{crop_distance, label_box, label_boxes, LabelBox};
use super::{LabeledVolume, Result, VolumeError};
use crate::vec3::Point3;
use std::io::Write;

/// One interior point per instance, sorted by label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CentroidTable {
    pub points: Vec<Point3>,
    pub labels: Vec<u32>,
}

impl CentroidTable {
    pub fn new(points: Vec<Point3>, labels: Vec<u32>) -> Self {
        assert_eq!(points.len(), labels.len(), "one label per centroid");
        Self { points, labels }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `label,x,y,z`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "x", "y", "z"])?;
        for (l, p) in self.labels.iter().zip(&self.points) {
            w.write_record([l.to_string(), fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2])])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> csv::Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut table = Self::default();
        for row in r.deserialize() {
            let (label, x, y, z): (u32, f64, f64, f64) = row?;
            table.labels.push(label);
            table.points.push([x, y, z]);
        }
        Ok(table)
    }
}

/// Float formatting shared by every CSV artifact: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Centers {
    weighted: Point3,
    lis: Point3,
}

fn centers_in_box(v: &LabeledVolume, id: u32, bbox: LabelBox) -> Centers {
    let crop = crop_distance(v, id, bbox);
    let mut sum = [0.0; 3];
    let mut total = 0.0;
    let mut best: Option<([usize; 3], f64)> = None;
    for (at, sq) in crop.label_voxels(v, id, bbox) {
        let dt = sq.sqrt();
        let c = v.spec.center(at[0], at[1], at[2]);
        for a in 0..3 {
            sum[a] += c[a] * dt;
        }
        total += dt;
        // Scan order is (k, j, i) ascending, so strict `>` keeps the
        // lexicographically smallest maximiser.
        if best.is_none_or(|(_, b)| sq > b) {
            best = Some((at, sq));
        }
    }
    let (at, _) = best.expect("label box holds at least one voxel");
    Centers {
        weighted: sum.map(|s| s / total),
        lis: v.spec.center(at[0], at[1], at[2]),
    }
}

fn require_box(v: &LabeledVolume, id: u32) -> Result<LabelBox> {
    if id == 0 {
        return Err(VolumeError::LabelAbsent(0));
    }
    label_box(v, id).ok_or(VolumeError::LabelAbsent(id))
}

/// `sum(center * dt) / sum(dt)` over the voxels of `id`.
pub fn dt_weighted_center(v: &LabeledVolume, id: u32) -> Result<Point3> {
    let bbox = require_box(v, id)?;
    Ok(centers_in_box(v, id, bbox).weighted)
}

/// Center of the voxel with the largest distance-to-boundary.
pub fn lis_center(v: &LabeledVolume, id: u32) -> Result<Point3> {
    let bbox = require_box(v, id)?;
    Ok(centers_in_box(v, id, bbox).lis)
}

/// Per instance, the mean of its distance-weighted center and its
/// largest-inscribed-sphere center.
pub fn centroid_table(v: &LabeledVolume) -> Result<CentroidTable> {
    let boxes = label_boxes(v);
    if boxes.is_empty() {
        return Err(VolumeError::NoInstances);
    }
    let mut table = CentroidTable::default();
    for (id, bbox) in boxes {
        let c = centers_in_box(v, id, bbox);
        let p = [0, 1, 2].map(|a| 0.5 * (c.weighted[a] + c.lis[a]));
        table.points.push(p);
        table.labels.push(id);
    }
    Ok(table)
}
