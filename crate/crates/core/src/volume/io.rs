//! VLF volumes: a JSON header `<name>.json` next to a raw little-endian
//! payload `<name>.bin`.

use super::{GridSpec, LabeledVolume, Result, ScalarField, VolumeError};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub dtype: String,
    pub order: String,
    pub endian: String,
}

impl VolumeHeader {
    fn for_grid(spec: &GridSpec, dtype: &str) -> Self {
        Self {
            dims: spec.dims,
            spacing: spec.spacing,
            origin: spec.origin,
            dtype: dtype.to_string(),
            order: "x-fastest".to_string(),
            endian: "little".to_string(),
        }
    }

    /// Declared payload size in bytes.
    pub fn payload_bytes(&self) -> usize {
        Self::payload_bytes_for(self.dims)
    }

    /// Payload size of a 4-byte-per-voxel grid.
    pub fn payload_bytes_for(dims: [usize; 3]) -> usize {
        dims.iter().product::<usize>() * 4
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Volume {
    Labels(LabeledVolume),
    Scalar(ScalarField),
}

impl Volume {
    pub fn into_labels(self) -> Option<LabeledVolume> {
        match self {
            Volume::Labels(v) => Some(v),
            Volume::Scalar(_) => None,
        }
    }
}

/// Header and payload paths for a volume given as `<name>`, `<name>.json` or
/// `<name>.bin`.
pub fn volume_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let mut header = stem.clone().into_os_string();
    header.push(".json");
    let mut payload = stem.into_os_string();
    payload.push(".bin");
    (header.into(), payload.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> VolumeError + '_ {
    move |source| VolumeError::Io { path: path.display().to_string(), source }
}

pub fn load_volume(path: &Path) -> Result<Volume> {
    let (header_path, payload_path) = volume_paths(path);
    let text = fs::read_to_string(&header_path).map_err(io_err(&header_path))?;
    let corrupt = |reason: String| VolumeError::CorruptHeader {
        path: header_path.display().to_string(),
        reason,
    };
    let header: VolumeHeader = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if header.order != "x-fastest" {
        return Err(corrupt(format!("unsupported order `{}`", header.order)));
    }
    if header.endian != "little" {
        return Err(corrupt(format!("unsupported endian `{}`", header.endian)));
    }
    if header.dtype != "u32" && header.dtype != "f32" {
        return Err(VolumeError::UnsupportedDtype(header.dtype));
    }
    let spec = GridSpec::new(header.dims, header.spacing, header.origin)?;
    let bytes = fs::read(&payload_path).map_err(io_err(&payload_path))?;
    if bytes.len() != header.payload_bytes() {
        return Err(VolumeError::PayloadLengthMismatch {
            expected: header.payload_bytes(),
            actual: bytes.len(),
        });
    }
    let words = bytes.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]);
    match header.dtype.as_str() {
        "u32" => LabeledVolume::new(spec, words.map(u32::from_le_bytes).collect()).map(Volume::Labels),
        _ => ScalarField::new(spec, words.map(|w| f32::from_le_bytes(w) as f64).collect())
            .map(Volume::Scalar),
    }
}

fn write_pair(path: &Path, header: &VolumeHeader, payload: Vec<u8>) -> Result<()> {
    let (header_path, payload_path) = volume_paths(path);
    let text = serde_json::to_string_pretty(header).expect("header serializes");
    fs::write(&header_path, text + "\n").map_err(io_err(&header_path))?;
    fs::write(&payload_path, payload).map_err(io_err(&payload_path))
}

pub fn save_labels(path: &Path, volume: &LabeledVolume) -> Result<()> {
    let header = VolumeHeader::for_grid(&volume.spec, "u32");
    let payload = volume.labels().iter().flat_map(|l| l.to_le_bytes()).collect();
    write_pair(path, &header, payload)
}

/// Writes a field as `f32`; values are narrowed.
pub fn save_field(path: &Path, field: &ScalarField) -> Result<()> {
    let header = VolumeHeader::for_grid(&field.spec, "f32");
    let payload = field.values().iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
    write_pair(path, &header, payload)
}
