//! Summary statistics, percentile whiskers and peak-normalised Gaussian KDEs.

mod kde;

pub use kde::{
    kde_1d, kde_2d, silverman_bandwidth, Bandwidth, Bandwidth2, DensityCurve1D, DensityGrid2D,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no samples")]
    Empty,
    #[error("sample length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite sample at {0}")]
    NonFinite(usize),
    #[error("log transform needs positive samples, found {0}")]
    NonPositive(f64),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mu: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sigma: f64,
    pub median: f64,
    /// `sigma / mu`, absent when `mu == 0`.
    pub cv: Option<f64>,
    pub p5: f64,
    pub p95: f64,
    pub n: usize,
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite(i));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Linear interpolation at rank `p / 100 * (n - 1)` of sorted data.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn percentile(samples: &[f64], p: f64) -> Result<f64, StatsError> {
    if !(0.0..=100.0).contains(&p) {
        return Err(StatsError::InvalidParam(format!("percentile {p} outside [0, 100]")));
    }
    Ok(percentile_sorted(&sorted_finite(samples)?, p))
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Sample standard deviation; `0` for a single sample.
pub fn sample_std(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(samples);
    (samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

pub fn summary(samples: &[f64]) -> Result<SummaryStats, StatsError> {
    let sorted = sorted_finite(samples)?;
    let mu = mean(samples);
    let sigma = sample_std(samples);
    Ok(SummaryStats {
        mu,
        sigma,
        median: percentile_sorted(&sorted, 50.0),
        cv: (mu != 0.0).then(|| sigma / mu),
        p5: percentile_sorted(&sorted, 5.0),
        p95: percentile_sorted(&sorted, 95.0),
        n: samples.len(),
    })
}

/// Boxplot markers: median, mean and 5th/95th percentile whiskers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub median: f64,
    pub mean: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
}

pub fn boxplot_stats(samples: &[f64]) -> Result<BoxplotStats, StatsError> {
    let s = summary(samples)?;
    Ok(BoxplotStats { median: s.median, mean: s.mu, whisker_lo: s.p5, whisker_hi: s.p95 })
}
