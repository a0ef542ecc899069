use super::{GridSpec, LabeledVolume, Result, VolumeError};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Face6,
    Full26,
}

impl Connectivity {
    fn offsets(self) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        for dk in -1i64..=1 {
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let manhattan = di.abs() + dj.abs() + dk.abs();
                    let keep = match self {
                        Connectivity::Face6 => manhattan == 1,
                        Connectivity::Full26 => manhattan > 0,
                    };
                    if keep {
                        out.push([di, dj, dk]);
                    }
                }
            }
        }
        out
    }
}

impl TryFrom<u32> for Connectivity {
    type Error = String;
    fn try_from(n: u32) -> std::result::Result<Self, String> {
        match n {
            6 => Ok(Connectivity::Face6),
            26 => Ok(Connectivity::Full26),
            _ => Err(format!("connectivity must be 6 or 26, got {n}")),
        }
    }
}

/// Flood-fill labelling of the voxels selected by `is_foreground`.
///
/// Components receive IDs `1..=count` in first-encounter scan order; voxels
/// outside the selection get `0`.
pub fn label_components(
    spec: &GridSpec,
    conn: Connectivity,
    is_foreground: impl Fn(usize) -> bool,
) -> (Vec<u32>, u32) {
    let [nx, ny, nz] = spec.dims;
    let offsets = conn.offsets();
    let mut out = vec![0u32; spec.len()];
    let mut queue = VecDeque::new();
    let mut next = 0u32;
    for seed in 0..spec.len() {
        if out[seed] != 0 || !is_foreground(seed) {
            continue;
        }
        next += 1;
        out[seed] = next;
        queue.push_back(seed);
        while let Some(idx) = queue.pop_front() {
            let [i, j, k] = spec.coords(idx);
            for off in &offsets {
                let (ni, nj, nk) = (i as i64 + off[0], j as i64 + off[1], k as i64 + off[2]);
                if ni < 0 || nj < 0 || nk < 0 {
                    continue;
                }
                let (ni, nj, nk) = (ni as usize, nj as usize, nk as usize);
                if ni >= nx || nj >= ny || nk >= nz {
                    continue;
                }
                let n = spec.index(ni, nj, nk);
                if out[n] == 0 && is_foreground(n) {
                    out[n] = next;
                    queue.push_back(n);
                }
            }
        }
    }
    (out, next)
}

/// Splits a binary `{0,1}` volume into connected instances.
pub fn connected_components(v: &LabeledVolume, conn: Connectivity) -> Result<LabeledVolume> {
    if let Some(&bad) = v.labels().iter().find(|&&l| l > 1) {
        return Err(VolumeError::NotBinary(bad));
    }
    let labels = v.labels();
    let (out, _) = label_components(&v.spec, conn, |idx| labels[idx] == 1);
    LabeledVolume::new(v.spec, out)
}
