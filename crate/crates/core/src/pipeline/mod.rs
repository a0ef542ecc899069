//! Orchestration: generate → centroids → graph → cells → stats, plus the
//! resolution sweep. Every command writes into one output directory and a
//! `manifest.json` describing the run.

mod config;

pub use config::{
    CellsSection, GenerateSection, GraphSection, Preset, RunConfig, StatsSection, SweepSection,
};

use crate::cellgeom::{extract_cells, Cell, CellError, CellRecord};
use crate::graph::{build_graph, LatticeGraph};
use crate::stats::{kde_1d, kde_2d, summary, Bandwidth, Bandwidth2, DensityCurve1D, DensityGrid2D, SummaryStats};
use crate::synthgen::{
    generate_ellipsoid_lattice, generate_graph_lattice, match_by_center, measure_objects,
    volume_error, EllipsoidLatticeConfig,
};
use crate::volume::{centroid_table, fmt_f64, load_volume, save_labels, volume_paths, CentroidTable, LabeledVolume, VolumeError};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input not found: {}", .0.display())]
    InputNotFound(PathBuf),
    #[error("i/o error at {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    /// Process exit code: 2 config, 3 I/O, 4 stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::InputNotFound(_) | PipelineError::Io { .. } => 3,
            PipelineError::Stage { .. } => 4,
        }
    }

    fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage { stage, message: e.to_string() }
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

/// Files written by the current command; removed again if the command fails.
struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
    created_dirs: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        let mut out = Self { dir: dir.to_path_buf(), written: Vec::new(), created_dirs: Vec::new() };
        out.mkdir(dir)?;
        Ok(out)
    }

    fn mkdir(&mut self, dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur.filter(|d| !d.as_os_str().is_empty() && !d.exists()) {
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        fs::create_dir_all(dir).map_err(|source| PipelineError::Io { path: dir.to_path_buf(), source })?;
        missing.reverse();
        self.created_dirs.extend(missing);
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            if !parent.exists() {
                self.mkdir(parent)?;
            }
        }
        fs::write(&path, bytes).map_err(|source| PipelineError::Io { path: path.clone(), source })?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<PathBuf> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| PipelineError::Io {
            path: self.path(name),
            source: std::io::Error::other(e.to_string()),
        })?;
        self.write(name, &buf)
    }

    fn volume(&mut self, name: &str, v: &LabeledVolume) -> Result<()> {
        let path = self.path(name);
        let (h, p) = volume_paths(&path);
        let res = save_labels(&path, v);
        // Record both halves so a failure cleans up whichever got written.
        self.written.push(h);
        self.written.push(p);
        res.map_err(|e| PipelineError::Io { path, source: std::io::Error::other(e.to_string()) })
    }

    fn rollback(self) {
        for p in self.written.iter().rev() {
            let _ = fs::remove_file(p);
        }
        for d in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

/// Runs `body` against a fresh output tracker, rolling back on error.
fn with_output<T>(dir: &Path, body: impl FnOnce(&mut Output) -> Result<T>) -> Result<T> {
    let mut out = Output::new(dir)?;
    match body(&mut out) {
        Ok(v) => Ok(v),
        Err(e) => {
            out.rollback();
            Err(e)
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    command: &'a str,
    seed: u64,
    config_sha256: String,
    /// Unix seconds; the only non-deterministic field of any artifact.
    created_unix: u64,
    config: &'a RunConfig,
}

fn write_manifest(out: &mut Output, command: &str, cfg: &RunConfig) -> Result<()> {
    let toml_text = cfg.to_toml();
    let hash = Sha256::digest(toml_text.as_bytes());
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let m = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.seed,
        config_sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
        created_unix,
        config: cfg,
    };
    let text = serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n";
    out.write("manifest.json", text.as_bytes()).map(|_| ())
}

/// What a `generate` call produced.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerateReport {
    pub volume: PathBuf,
    pub instances: usize,
    pub truth_edges: Option<usize>,
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<GenerateReport> {
    cfg.validate()?;
    with_output(&cfg.output, |out| {
        let report = match cfg.generate.preset {
            Preset::Ellipsoid => {
                let lat = generate_ellipsoid_lattice(&cfg.generate.ellipsoid)
                    .map_err(|e| PipelineError::stage("generate", e))?;
                out.volume("volume", &lat.volume)?;
                out.csv("truth.csv", |b| lat.write_truth_csv(b))?;
                GenerateReport { volume: out.path("volume"), instances: lat.truth.len(), truth_edges: None }
            }
            Preset::Graphlattice => {
                let glc = crate::synthgen::GraphLatticeConfig { seed: cfg.seed, ..cfg.generate.graphlattice.clone() };
                let lat = generate_graph_lattice(&glc).map_err(|e| PipelineError::stage("generate", e))?;
                out.volume("volume", &lat.volume)?;
                out.csv("truth_nodes.csv", |b| lat.write_nodes_csv(b))?;
                out.csv("truth_edges.csv", |b| lat.write_edges_csv(b))?;
                GenerateReport {
                    volume: out.path("volume"),
                    instances: lat.nodes.len(),
                    truth_edges: Some(lat.edges.len()),
                }
            }
        };
        write_manifest(out, "generate", cfg)?;
        Ok(report)
    })
}

fn require_input(cfg: &RunConfig) -> Result<&Path> {
    cfg.input.as_deref().ok_or_else(|| PipelineError::Config("no input path given".into()))
}

/// Loads a labelled VLF volume, reporting a missing header or payload as
/// "input not found".
pub fn load_labels(path: &Path) -> Result<LabeledVolume> {
    let (h, p) = volume_paths(path);
    for f in [&h, &p] {
        if !f.exists() {
            return Err(PipelineError::InputNotFound(f.clone()));
        }
    }
    let vol = load_volume(path).map_err(|e| match e {
        VolumeError::Io { source, .. } => PipelineError::Io { path: path.to_path_buf(), source },
        VolumeError::CorruptHeader { .. } | VolumeError::PayloadLengthMismatch { .. } => {
            PipelineError::Io { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) }
        }
        other => PipelineError::stage("load", other),
    })?;
    vol.into_labels()
        .ok_or_else(|| PipelineError::stage("load", "expected a u32 label volume, found a scalar field"))
}

/// Every stage result of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub centroids: CentroidTable,
    pub graph: Option<LatticeGraph>,
    pub cells: Option<Vec<Cell>>,
    pub stats: Option<StatsReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Centroids,
    Graph,
    Cells,
    Stats,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Centroids => "centroids",
            Stage::Graph => "graph",
            Stage::Cells => "cells",
            Stage::Stats => "stats",
        }
    }
}

/// Runs the pipeline on `input` up to and including `last`.
pub fn run_stages(cfg: &RunConfig, last: Stage) -> Result<PipelineResult> {
    cfg.validate()?;
    let v = load_labels(require_input(cfg)?)?;
    with_output(&cfg.output, |out| {
        let res = run_on_volume(cfg, &v, last, out)?;
        write_manifest(out, last.name(), cfg)?;
        Ok(res)
    })
}

/// Full pipeline: centroids, graph, cells and statistics.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<PipelineResult> {
    run_stages(cfg, Stage::Stats)
}

fn run_on_volume(cfg: &RunConfig, v: &LabeledVolume, last: Stage, out: &mut Output) -> Result<PipelineResult> {
    let centroids = centroid_table(v).map_err(|e| PipelineError::stage("centroids", e))?;
    out.csv("centroids.csv", |b| centroids.write_csv(b))?;
    log::info!("centroids: {} instances", centroids.len());
    let mut res = PipelineResult { centroids, graph: None, cells: None, stats: None };
    if last == Stage::Centroids {
        return Ok(res);
    }

    let params = cfg.graph.params(&v.spec);
    let g = build_graph(&res.centroids, Some(v), &params).map_err(|e| PipelineError::stage("graph", e))?;
    out.csv("edges.csv", |b| g.write_edges_csv(b))?;
    out.csv("degrees.csv", |b| g.write_degrees_csv(b))?;
    log::info!("graph: {} edges", g.edges.len());
    if last == Stage::Graph {
        res.graph = Some(g);
        return Ok(res);
    }

    let tau_cell = cfg.cells.tau_cell.unwrap_or(3.0 * v.spec.min_spacing());
    let cells = match extract_cells(&g, v, tau_cell, cfg.cells.min_nodes) {
        Ok(c) => c,
        Err(CellError::NoQualifyingVoids { voids }) => {
            log::warn!("no qualifying cells ({voids} enclosed voids)");
            Vec::new()
        }
        Err(e) => return Err(PipelineError::stage("cells", e)),
    };
    let records: Vec<CellRecord> = cells.iter().map(|c| c.record.clone()).collect();
    out.csv("cells.csv", |b| CellRecord::write_csv(&records, b))?;
    for c in &cells {
        let mut buf = Vec::new();
        c.mesh.write_tri(&mut buf).expect("writing to memory");
        out.write(&format!("meshes/cell_{:04}.tri", c.record.cell_id), &buf)?;
    }
    log::info!("cells: {}", cells.len());
    res.graph = Some(g);
    if last == Stage::Cells {
        res.cells = Some(cells);
        return Ok(res);
    }

    let report = stats_report(&records, &cfg.stats).map_err(|e| PipelineError::stage("stats", e))?;
    write_stats(out, &report)?;
    res.cells = Some(cells);
    res.stats = Some(report);
    Ok(res)
}

/// Names of the measured features, in export order.
pub const FEATURES: [&str; 7] = ["Lx", "Ly", "Lz", "V", "AR1", "AR2", "AR3"];

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub summaries: BTreeMap<String, SummaryStats>,
    pub curves: Vec<(String, DensityCurve1D)>,
    /// Joint densities of volume against each aspect ratio.
    pub joint: Vec<(String, DensityGrid2D)>,
}

fn feature_columns(records: &[CellRecord]) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::with_capacity(records.len()); FEATURES.len()];
    for r in records {
        let row = [r.extents[0], r.extents[1], r.extents[2], r.volume, r.aspect[0], r.aspect[1], r.aspect[2]];
        for (c, x) in cols.iter_mut().zip(row) {
            c.push(x);
        }
    }
    cols
}

/// Summaries and KDEs for every feature. Empty input yields an empty report.
pub fn stats_report(records: &[CellRecord], cfg: &StatsSection) -> std::result::Result<StatsReport, crate::stats::StatsError> {
    let mut report = StatsReport { summaries: BTreeMap::new(), curves: Vec::new(), joint: Vec::new() };
    if records.is_empty() {
        log::warn!("stats: no cells, every feature is empty");
        return Ok(report);
    }
    let cols = feature_columns(records);
    let bw = cfg.bandwidth.map_or(Bandwidth::Auto, Bandwidth::Value);
    let bw2 = cfg.bandwidth_2d.map_or(Bandwidth2::Auto, |[a, b]| Bandwidth2::Pair(a, b));
    for (name, col) in FEATURES.iter().zip(&cols) {
        report.summaries.insert(name.to_string(), summary(col)?);
        report.curves.push((name.to_string(), kde_1d(col, cfg.grid_1d, bw)?));
    }
    for a in 4..7 {
        let name = format!("V_{}", FEATURES[a]);
        report.joint.push((name, kde_2d(&cols[3], &cols[a], cfg.grid_2d, bw2, cfg.log_x)?));
    }
    Ok(report)
}

fn write_stats(out: &mut Output, report: &StatsReport) -> Result<()> {
    let json = serde_json::to_string_pretty(&report.summaries).expect("stats serialize") + "\n";
    out.write("stats.json", json.as_bytes())?;
    for (name, c) in &report.curves {
        out.csv(&format!("kde_{name}.csv"), |b| c.write_csv(b))?;
    }
    for (name, g) in &report.joint {
        out.csv(&format!("kde2d_{name}.csv"), |b| g.write_csv(b))?;
    }
    Ok(())
}

/// Statistics from a cells CSV given as `input`.
pub fn cmd_stats(cfg: &RunConfig) -> Result<StatsReport> {
    cfg.validate()?;
    let path = require_input(cfg)?;
    if !path.exists() {
        return Err(PipelineError::InputNotFound(path.to_path_buf()));
    }
    let file = fs::File::open(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    let records = CellRecord::read_csv(file).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })?;
    with_output(&cfg.output, |out| {
        let report = stats_report(&records, &cfg.stats).map_err(|e| PipelineError::stage("stats", e))?;
        write_stats(out, &report)?;
        write_manifest(out, "stats", cfg)?;
        Ok(report)
    })
}

/// One resolution of the volume-error sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub nx: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub payload_bytes: usize,
    pub instances: usize,
}

/// Voxelizes the ellipsoid lattice at `nx` and scores voxel-count volumes.
pub fn sweep_row(base: &EllipsoidLatticeConfig, nx: usize) -> Result<SweepRow> {
    let cfg = EllipsoidLatticeConfig { nx, ..base.clone() };
    let lat = generate_ellipsoid_lattice(&cfg).map_err(|e| PipelineError::stage("sweep", e))?;
    let objs = measure_objects(&lat.volume);
    let centers: Vec<_> = objs.iter().map(|o| o.center).collect();
    let truth_centers: Vec<_> = lat.truth.iter().map(|t| t.center).collect();
    let matched = match_by_center(&centers, &truth_centers).map_err(|e| PipelineError::stage("sweep", e))?;
    let predicted: Vec<f64> = objs.iter().map(|o| o.volume).collect();
    let truth: Vec<f64> = matched.iter().map(|&t| lat.truth[t].volume).collect();
    let (mean_error, std_error) = volume_error(&predicted, &truth).map_err(|e| PipelineError::stage("sweep", e))?;
    Ok(SweepRow {
        nx,
        mean_error,
        std_error,
        payload_bytes: crate::volume::VolumeHeader::payload_bytes_for([nx; 3]),
        instances: objs.len(),
    })
}

/// Fixed-width table matching the sweep CSV.
pub fn format_sweep_table(rows: &[SweepRow]) -> String {
    let mut s = format!("{:>6}  {:>18}  {:>14}  {:>9}\n", "nx", "error % (mean±std)", "payload bytes", "instances");
    for r in rows {
        s += &format!(
            "{:>6}  {:>18}  {:>14}  {:>9}\n",
            r.nx,
            format!("{:.3} ± {:.3}", r.mean_error, r.std_error),
            r.payload_bytes,
            r.instances
        );
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    with_output(&cfg.output, |out| {
        let mut rows = Vec::new();
        for &nx in &cfg.sweep.nx {
            let row = sweep_row(&cfg.generate.ellipsoid, nx)?;
            log::info!("sweep nx={nx}: {:.4}% ± {:.4}%", row.mean_error, row.std_error);
            rows.push(row);
        }
        out.csv("sweep.csv", |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["nx", "mean_error_pct", "std_error_pct", "payload_bytes", "instances"])?;
            for r in &rows {
                w.write_record([
                    r.nx.to_string(),
                    fmt_f64(r.mean_error),
                    fmt_f64(r.std_error),
                    r.payload_bytes.to_string(),
                    r.instances.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        })?;
        write_manifest(out, "sweep", cfg)?;
        Ok(rows)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(PipelineError::Config("x".into()).exit_code(), 2);
        assert_eq!(PipelineError::InputNotFound("a".into()).exit_code(), 3);
        assert_eq!(PipelineError::stage("graph", "boom").exit_code(), 4);
        assert_eq!(PipelineError::stage("graph", "boom").to_string(), "stage `graph` failed: boom");
    }

    #[test]
    fn missing_input_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            input: Some(dir.path().join("nope")),
            output: dir.path().join("out"),
            ..Default::default()
        };
        let err = cmd_pipeline(&cfg).unwrap_err();
        assert!(err.to_string().starts_with("input not found"), "{err}");
        assert!(!dir.path().join("out").exists());
    }

    #[test]
    fn failed_stage_removes_partial_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let v = LabeledVolume::zeros(crate::volume::GridSpec::unit([4, 4, 4]).unwrap());
        save_labels(&dir.path().join("empty"), &v).unwrap();
        let cfg = RunConfig {
            input: Some(dir.path().join("empty")),
            output: dir.path().join("run/out"),
            ..Default::default()
        };
        let err = cmd_pipeline(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(!dir.path().join("run").exists());
    }

    #[test]
    fn single_instance_has_no_edges_or_cells() {
        let dir = tempfile::tempdir().unwrap();
        let mut v = LabeledVolume::zeros(crate::volume::GridSpec::unit([6, 6, 6]).unwrap());
        v.set(2, 2, 2, 5);
        save_labels(&dir.path().join("one"), &v).unwrap();
        let cfg = RunConfig {
            input: Some(dir.path().join("one")),
            output: dir.path().join("out"),
            ..Default::default()
        };
        let res = cmd_pipeline(&cfg).unwrap();
        assert!(res.graph.unwrap().edges.is_empty());
        assert!(res.cells.unwrap().is_empty());
        assert!(res.stats.unwrap().summaries.is_empty());
        let json = fs::read_to_string(dir.path().join("out/stats.json")).unwrap();
        assert_eq!(json.trim(), "{}");
    }

    #[test]
    fn sweep_row_small() {
        let row = sweep_row(&EllipsoidLatticeConfig::default(), 30).unwrap();
        assert_eq!(row.instances, 60);
        assert_eq!(row.payload_bytes, 30 * 30 * 30 * 4);
        assert!(row.mean_error > 0.0 && row.mean_error < 50.0);
    }
}
