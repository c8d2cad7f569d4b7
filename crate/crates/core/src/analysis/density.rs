//! Binned phase-space densities with optional Gaussian smoothing.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};

/// Requested grid: bin edges span [x_min, x_max] x [p_min, p_max].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

/// Kernel bandwidth selection for [`phase_space_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Per-axis rule of thumb h_i = σ_i·n^(-1/6) (two-dimensional Silverman).
    Silverman,
    /// Isotropic kernel of the given width (same units as the axes);
    /// 0 gives the raw histogram.
    Fixed(f64),
}

/// Normalized binned density over phase space. The momentum axis carries the
/// same units as position (points are (x, p/(mω))).
#[derive(Debug, Clone, Serialize)]
pub struct PhaseSpaceDistribution {
    pub x_edges: Vec<f64>,
    pub p_edges: Vec<f64>,
    /// Row i = x bin, column j = p bin; integrates (× cell area) to 1.
    pub density: Array2<f64>,
    /// Applied kernel widths (x, p); (0, 0) for a raw histogram.
    pub bandwidth: (f64, f64),
}

/// Normalized one-dimensional marginal on bin centers.
#[derive(Debug, Clone, Serialize)]
pub struct Marginal {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

impl PhaseSpaceDistribution {
    pub fn cell_area(&self) -> f64 {
        let dx = self.x_edges[1] - self.x_edges[0];
        let dp = self.p_edges[1] - self.p_edges[0];
        dx * dp
    }

    pub fn x_centers(&self) -> Vec<f64> {
        self.x_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn p_centers(&self) -> Vec<f64> {
        self.p_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.density.sum() * self.cell_area()
    }
}

fn std_of(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Default grid: `bins` x `bins` covering ±4 standard deviations per axis,
/// expanded where necessary so every point is inside.
fn auto_grid(points: &[(f64, f64)], bins: usize) -> GridSpec {
    let sx = std_of(points.iter().map(|p| p.0));
    let sp = std_of(points.iter().map(|p| p.1));
    let mx = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let mp = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let mut x_min = mx - 4.0 * sx;
    let mut x_max = mx + 4.0 * sx;
    let mut p_min = mp - 4.0 * sp;
    let mut p_max = mp + 4.0 * sp;
    for &(x, p) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        p_min = p_min.min(p);
        p_max = p_max.max(p);
    }
    // pad one cell so extreme points do not sit on the outer edge
    let pad_x = (x_max - x_min).max(f64::MIN_POSITIVE) / bins as f64;
    let pad_p = (p_max - p_min).max(f64::MIN_POSITIVE) / bins as f64;
    GridSpec {
        x_min: x_min - pad_x,
        x_max: x_max + pad_x,
        p_min: p_min - pad_p,
        p_max: p_max + pad_p,
        nx: bins,
        np: bins,
    }
}

fn gaussian_kernel(h: f64, cell: f64) -> Vec<f64> {
    if h <= 0.0 {
        return vec![1.0];
    }
    let half = ((4.0 * h / cell).ceil() as usize).max(1);
    let mut k: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let d = (i as f64 - half as f64) * cell;
            (-0.5 * d * d / (h * h)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

fn convolve_axis(density: &Array2<f64>, kernel: &[f64], along_rows: bool) -> Array2<f64> {
    if kernel.len() == 1 {
        return density.clone();
    }
    let half = kernel.len() / 2;
    let (nx, np) = density.dim();
    let mut out = Array2::zeros((nx, np));
    for i in 0..nx {
        for j in 0..np {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let off = k as isize - half as isize;
                let (si, sj) = if along_rows {
                    (i as isize + off, j as isize)
                } else {
                    (i as isize, j as isize + off)
                };
                if si >= 0 && sj >= 0 && (si as usize) < nx && (sj as usize) < np {
                    acc += w * density[(si as usize, sj as usize)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Histogram the point cloud on the grid and optionally convolve with a
/// Gaussian kernel; the result is normalized so that Σ density × cell = 1.
///
/// With an explicit grid, points outside it are an error. Without one, a
/// 121×121 grid covering ±4σ (expanded to include all points) is used.
pub fn phase_space_density(
    points: &[(f64, f64)],
    grid: Option<GridSpec>,
    bandwidth: Bandwidth,
) -> Result<PhaseSpaceDistribution> {
    if points.len() < 10 {
        return Err(Error::InsufficientData {
            what: "phase-space density",
            message: format!("need at least 10 points, got {}", points.len()),
        });
    }
    let explicit = grid.is_some();
    let spec = grid.unwrap_or_else(|| auto_grid(points, 121));
    if spec.nx < 2 || spec.np < 2 || !(spec.x_max > spec.x_min) || !(spec.p_max > spec.p_min) {
        return Err(Error::invalid_param("grid", "degenerate grid specification"));
    }

    let dx = (spec.x_max - spec.x_min) / spec.nx as f64;
    let dp = (spec.p_max - spec.p_min) / spec.np as f64;
    let mut density = Array2::<f64>::zeros((spec.nx, spec.np));
    let mut outside = 0usize;
    for &(x, p) in points {
        if x < spec.x_min || x > spec.x_max || p < spec.p_min || p > spec.p_max {
            outside += 1;
            continue;
        }
        let i = (((x - spec.x_min) / dx) as usize).min(spec.nx - 1);
        let j = (((p - spec.p_min) / dp) as usize).min(spec.np - 1);
        density[(i, j)] += 1.0;
    }
    if outside > 0 {
        if explicit {
            return Err(Error::PointsOutsideGrid { count: outside });
        }
        // auto grid covers all points by construction
        debug_assert_eq!(outside, 0);
    }

    let (hx, hp) = match bandwidth {
        Bandwidth::Fixed(h) if h < 0.0 => {
            return Err(Error::invalid_param("bandwidth", "must be >= 0"))
        }
        Bandwidth::Fixed(h) => (h, h),
        Bandwidth::Silverman => {
            let f = (points.len() as f64).powf(-1.0 / 6.0);
            (
                std_of(points.iter().map(|p| p.0)) * f,
                std_of(points.iter().map(|p| p.1)) * f,
            )
        }
    };
    if hx > 0.0 {
        density = convolve_axis(&density, &gaussian_kernel(hx, dx), true);
    }
    if hp > 0.0 {
        density = convolve_axis(&density, &gaussian_kernel(hp, dp), false);
    }

    let mass = density.sum() * dx * dp;
    density.mapv_inplace(|v| v / mass);

    let x_edges = (0..=spec.nx).map(|i| spec.x_min + i as f64 * dx).collect();
    let p_edges = (0..=spec.np).map(|j| spec.p_min + j as f64 * dp).collect();
    Ok(PhaseSpaceDistribution {
        x_edges,
        p_edges,
        density,
        bandwidth: (hx, hp),
    })
}

/// Sum the density over the momentum axis; normalized to unit integral.
pub fn position_marginal(dist: &PhaseSpaceDistribution) -> Marginal {
    let dp = dist.p_edges[1] - dist.p_edges[0];
    let dx = dist.x_edges[1] - dist.x_edges[0];
    let mut density: Vec<f64> = dist
        .density
        .rows()
        .into_iter()
        .map(|row| row.sum() * dp)
        .collect();
    let total: f64 = density.iter().sum::<f64>() * dx;
    for v in &mut density {
        *v /= total;
    }
    Marginal {
        x: dist.x_centers(),
        density,
    }
}
