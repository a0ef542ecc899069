//! Synthetic benchmarks: a packed ellipsoid lattice with analytic volumes, and
//! a graph lattice of vertex blobs, edge trails and face walls with known
//! topology.

mod ellipsoid;
mod lattice;

pub use ellipsoid::{
    generate_ellipsoid_lattice, measure_objects, EllipsoidLattice, EllipsoidLatticeConfig,
    ObjectTruth, VoxelObject,
};
pub use lattice::{generate_graph_lattice, GraphLattice, GraphLatticeConfig};

use crate::vec3::{dist2, Point3};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("ellipsoids overlap: semi-axis fraction {0} exceeds 0.5 of the pitch")]
    Overlap(f64),
    #[error("cannot match objects: {0}")]
    Unmatched(String),
}

/// Seeded generator shared by every stochastic routine here.
pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// Per-object percentage error `100 |pred - truth| / truth`, as mean and
/// sample standard deviation.
pub fn volume_error(predicted: &[f64], truth: &[f64]) -> Result<(f64, f64), SynthError> {
    if predicted.len() != truth.len() {
        return Err(SynthError::Unmatched(format!(
            "{} predictions for {} objects",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(SynthError::Unmatched("no objects".into()));
    }
    if let Some(t) = truth.iter().find(|&&t| !(t > 0.0)) {
        return Err(SynthError::InvalidConfig(format!("truth volume must be > 0, got {t}")));
    }
    let errs: Vec<f64> =
        predicted.iter().zip(truth).map(|(p, t)| 100.0 * (p - t).abs() / t).collect();
    Ok((crate::stats::mean(&errs), crate::stats::sample_std(&errs)))
}

/// For each predicted center, the index of the nearest truth center. Fails
/// unless the assignment is a bijection.
pub fn match_by_center(predicted: &[Point3], truth: &[Point3]) -> Result<Vec<usize>, SynthError> {
    if predicted.len() != truth.len() {
        return Err(SynthError::Unmatched(format!(
            "{} predictions for {} objects",
            predicted.len(),
            truth.len()
        )));
    }
    let mut taken = vec![false; truth.len()];
    let mut out = Vec::with_capacity(predicted.len());
    for (n, &p) in predicted.iter().enumerate() {
        let best = (0..truth.len())
            .min_by(|&a, &b| dist2(p, truth[a]).total_cmp(&dist2(p, truth[b])).then(a.cmp(&b)))
            .ok_or_else(|| SynthError::Unmatched("no objects".into()))?;
        if std::mem::replace(&mut taken[best], true) {
            return Err(SynthError::Unmatched(format!(
                "prediction {n} maps onto already matched object {best}"
            )));
        }
        out.push(best);
    }
    Ok(out)
}

/// `n` normal samples with the given mean and coefficient of variation.
pub fn length_samples(n: usize, mean: f64, cv: f64, seed: u64) -> Result<Vec<f64>, SynthError> {
    let normal = Normal::new(mean, cv * mean.abs())
        .map_err(|e| SynthError::InvalidConfig(format!("length distribution: {e}")))?;
    let mut r = rng(seed);
    Ok((0..n).map(|_| normal.sample(&mut r)).collect())
}
