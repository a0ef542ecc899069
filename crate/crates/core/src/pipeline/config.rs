//! TOML run configuration.

use super::PipelineError;
use crate::graph::{AxialMetric, Axis, BetweenGate, ClusterGate, GraphParams};
use crate::synthgen::{EllipsoidLatticeConfig, GraphLatticeConfig};
use crate::volume::GridSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Input VLF volume (or cells CSV for the `stats` command).
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub graph: GraphSection,
    pub cells: CellsSection,
    pub stats: StatsSection,
    pub generate: GenerateSection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            input: None,
            output: PathBuf::from("out"),
            graph: GraphSection::default(),
            cells: CellsSection::default(),
            stats: StatsSection::default(),
            generate: GenerateSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

/// Graph parameters under their short names. Lengths are physical; `grid`
/// defaults to four voxel spacings and `tau` to two minimum spacings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub axis: Axis,
    pub extra_axes: Vec<Axis>,
    pub grid: Option<[f64; 3]>,
    #[serde(rename = "A_max")]
    pub a_max: i64,
    #[serde(rename = "R_side")]
    pub r_side: i64,
    #[serde(rename = "K")]
    pub k: usize,
    pub deg_max: usize,
    pub reverse_pass: bool,
    pub axial_metric: AxialMetric,
    pub cluster_gate: bool,
    pub tau: Option<f64>,
    pub between_gate: bool,
    pub s_vox: f64,
    pub r_vox: f64,
    pub phi_min: f64,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self {
            axis: Axis::PosX,
            extra_axes: Vec::new(),
            grid: None,
            a_max: 3,
            r_side: 2,
            k: 4,
            deg_max: 6,
            reverse_pass: true,
            axial_metric: AxialMetric::Continuous,
            cluster_gate: true,
            tau: None,
            between_gate: true,
            s_vox: 0.5,
            r_vox: 1.5,
            phi_min: 0.6,
        }
    }
}

impl GraphSection {
    pub fn params(&self, spec: &GridSpec) -> GraphParams {
        let h = spec.min_spacing();
        GraphParams {
            axis: self.axis,
            extra_axes: self.extra_axes.clone(),
            bin_grids: self.grid.unwrap_or(spec.spacing.map(|s| 4.0 * s)),
            max_axial_span: self.a_max,
            max_lateral_offset: self.r_side,
            beam_width: self.k,
            max_degree: self.deg_max,
            reverse_pass: self.reverse_pass,
            cluster_gate: self
                .cluster_gate
                .then(|| ClusterGate { tau: self.tau.unwrap_or(2.0 * h) }),
            between_gate: self.between_gate.then_some(BetweenGate {
                step_vox: self.s_vox,
                radius_vox: self.r_vox,
                min_hit_fraction: self.phi_min,
            }),
            axial_metric: self.axial_metric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellsSection {
    /// Physical; defaults to three minimum spacings.
    pub tau_cell: Option<f64>,
    pub min_nodes: usize,
}

impl Default for CellsSection {
    fn default() -> Self {
        Self { tau_cell: None, min_nodes: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub grid_1d: usize,
    pub grid_2d: usize,
    /// Fixed 1D bandwidth; Silverman when absent.
    pub bandwidth: Option<f64>,
    pub bandwidth_2d: Option<[f64; 2]>,
    /// KDE the volume axis of the joint densities in log space.
    pub log_x: bool,
}

impl Default for StatsSection {
    fn default() -> Self {
        Self { grid_1d: 256, grid_2d: 128, bandwidth: None, bandwidth_2d: None, log_x: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    Ellipsoid,
    Graphlattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub preset: Preset,
    pub ellipsoid: EllipsoidLatticeConfig,
    pub graphlattice: GraphLatticeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub nx: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { nx: vec![60, 120, 240, 480] }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Checks every numeric field against its module's invariants.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg = |m: String| Err(PipelineError::Config(m));
        let unit = GridSpec::unit([1, 1, 1]).expect("unit grid");
        self.graph.params(&unit).validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if let Some(t) = self.graph.tau {
            if !(t.is_finite() && t > 0.0) {
                return cfg(format!("graph.tau must be > 0, got {t}"));
            }
        }
        if let Some(t) = self.cells.tau_cell {
            if !(t.is_finite() && t > 0.0) {
                return cfg(format!("cells.tau_cell must be > 0, got {t}"));
            }
        }
        if self.cells.min_nodes < 4 {
            return cfg(format!("cells.min_nodes must be >= 4, got {}", self.cells.min_nodes));
        }
        if self.stats.grid_1d < 2 || self.stats.grid_2d < 2 {
            return cfg("stats grid sizes must be >= 2".into());
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.stats.bandwidth.is_some_and(|h| !positive(h))
            || self.stats.bandwidth_2d.is_some_and(|[a, b]| !(positive(a) && positive(b)))
        {
            return cfg("stats bandwidths must be > 0".into());
        }
        let synth = |e: crate::synthgen::SynthError| PipelineError::Config(e.to_string());
        self.generate.ellipsoid.validate().map_err(synth)?;
        self.generate.graphlattice.validate().map_err(synth)?;
        if self.sweep.nx.is_empty() {
            return cfg("sweep.nx must not be empty".into());
        }
        for &nx in &self.sweep.nx {
            EllipsoidLatticeConfig { nx, ..self.generate.ellipsoid.clone() }.validate().map_err(synth)?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
