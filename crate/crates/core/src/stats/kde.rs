use super::{percentile_sorted, sample_std, sorted_finite, StatsError};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// Silverman's rule of thumb.
    #[default]
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth2 {
    #[default]
    Auto,
    Pair(f64, f64),
}

/// Silverman bandwidth `0.9 min(sigma, IQR / 1.34) n^(-exponent)`.
///
/// Falls back to `1.06 sigma n^(-exponent)` when the IQR vanishes, and to one
/// percent of the sample magnitude (or `0.01`) when all samples coincide.
pub fn silverman_bandwidth(samples: &[f64], exponent: f64) -> Result<f64, StatsError> {
    let sorted = sorted_finite(samples)?;
    let n = samples.len() as f64;
    let sigma = sample_std(samples);
    if sigma == 0.0 {
        let scale = sorted[0].abs();
        return Ok(if scale > 0.0 { 0.01 * scale } else { 0.01 });
    }
    let iqr = percentile_sorted(&sorted, 75.0) - percentile_sorted(&sorted, 25.0);
    let spread = if iqr > 0.0 { sigma.min(iqr / 1.34) } else { sigma };
    let factor = if iqr > 0.0 { 0.9 } else { 1.06 };
    Ok(factor * spread * n.powf(-exponent))
}

fn resolve(bw: Option<f64>, samples: &[f64], exponent: f64) -> Result<f64, StatsError> {
    match bw {
        Some(h) if h.is_finite() && h > 0.0 => Ok(h),
        Some(h) => Err(StatsError::InvalidParam(format!("bandwidth must be > 0, got {h}"))),
        None => silverman_bandwidth(samples, exponent),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { hi } else { lo + k as f64 * step }).collect()
}

fn check_grid(n: usize) -> Result<(), StatsError> {
    if n < 2 {
        return Err(StatsError::InvalidParam(format!("grid size must be >= 2, got {n}")));
    }
    Ok(())
}

fn normalise(values: &mut [f64]) -> f64 {
    let peak = values.iter().copied().fold(0.0, f64::max);
    for v in values.iter_mut() {
        *v /= peak;
    }
    peak
}

/// Gaussian KDE on `[min - 3h, max + 3h]`, rescaled so its maximum is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve1D {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// Maximum of the unnormalised density; `density * peak` integrates to ~1.
    pub peak: f64,
}

impl DensityCurve1D {
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "density"])?;
        for (x, d) in self.grid.iter().zip(&self.density) {
            w.write_record([crate::volume::fmt_f64(*x), crate::volume::fmt_f64(*d)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn kde_1d(
    samples: &[f64],
    grid_size: usize,
    bandwidth: Bandwidth,
) -> Result<DensityCurve1D, StatsError> {
    check_grid(grid_size)?;
    let sorted = sorted_finite(samples)?;
    let h = resolve(
        match bandwidth {
            Bandwidth::Auto => None,
            Bandwidth::Value(h) => Some(h),
        },
        samples,
        0.2,
    )?;
    let grid = linspace(sorted[0] - 3.0 * h, sorted[sorted.len() - 1] + 3.0 * h, grid_size);
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * PI).sqrt());
    let mut density: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &s in samples {
                let u = (x - s) / h;
                acc += (-0.5 * u * u).exp();
            }
            acc * norm
        })
        .collect();
    let peak = normalise(&mut density);
    Ok(DensityCurve1D { grid, density, bandwidth: h, peak })
}

/// Product-Gaussian KDE over paired samples, max-normalised.
///
/// `density[iy * x_grid.len() + ix]` is the value at `(x_grid[ix], y_grid[iy])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid2D {
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: (f64, f64),
    /// The x axis holds `ln(x)` when set.
    pub log_x: bool,
    pub peak: f64,
}

impl DensityGrid2D {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.density[iy * self.x_grid.len() + ix]
    }

    /// Long-format CSV `x,y,density`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        use crate::volume::fmt_f64;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([if self.log_x { "ln_x" } else { "x" }, "y", "density"])?;
        for (iy, y) in self.y_grid.iter().enumerate() {
            for (ix, x) in self.x_grid.iter().enumerate() {
                w.write_record([fmt_f64(*x), fmt_f64(*y), fmt_f64(self.at(ix, iy))])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn kde_2d(
    xs: &[f64],
    ys: &[f64],
    grid_size: usize,
    bandwidths: Bandwidth2,
    log_x: bool,
) -> Result<DensityGrid2D, StatsError> {
    check_grid(grid_size)?;
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let xs: Vec<f64> = if log_x {
        if let Some(&bad) = xs.iter().find(|&&x| !(x > 0.0)) {
            return Err(StatsError::NonPositive(bad));
        }
        xs.iter().map(|x| x.ln()).collect()
    } else {
        xs.to_vec()
    };
    let sx = sorted_finite(&xs)?;
    let sy = sorted_finite(ys)?;
    let exponent = 1.0 / 6.0;
    let (bx, by) = match bandwidths {
        Bandwidth2::Auto => (None, None),
        Bandwidth2::Pair(a, b) => (Some(a), Some(b)),
    };
    let hx = resolve(bx, &xs, exponent)?;
    let hy = resolve(by, ys, exponent)?;
    let x_grid = linspace(sx[0] - 3.0 * hx, sx[sx.len() - 1] + 3.0 * hx, grid_size);
    let y_grid = linspace(sy[0] - 3.0 * hy, sy[sy.len() - 1] + 3.0 * hy, grid_size);
    let norm = 1.0 / (xs.len() as f64 * hx * hy * 2.0 * PI);
    let mut density = Vec::with_capacity(grid_size * grid_size);
    for &y in &y_grid {
        for &x in &x_grid {
            let mut acc = 0.0;
            for (&a, &b) in xs.iter().zip(ys) {
                let (u, v) = ((x - a) / hx, (y - b) / hy);
                acc += (-0.5 * (u * u + v * v)).exp();
            }
            density.push(acc * norm);
        }
    }
    let peak = normalise(&mut density);
    Ok(DensityGrid2D { x_grid, y_grid, density, bandwidth: (hx, hy), log_x, peak })
}
