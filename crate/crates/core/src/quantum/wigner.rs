//! Wigner transform of a position-grid density matrix.
//!
//! W(x, p) = (1/πħ) ∫ dy ρ(x+y, x-y) e^{-2ipy/ħ}, evaluated per grid row by
//! resampling the anti-diagonal through (x_i, x_i) and Fourier transforming
//! in y. The momentum grid has spacing πħ/(N·dx), half the density matrix's
//! natural conjugate spacing.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::state::DensityMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct WignerDistribution {
    /// Position grid (internal units).
    pub x: Vec<f64>,
    /// Momentum grid, ascending (internal units).
    pub p: Vec<f64>,
    /// values[(i, j)] = W(x_i, p_j).
    pub values: Array2<f64>,
    pub dx: f64,
    pub dp: f64,
}

const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Transform ρ to its Wigner distribution. Errors if the imaginary residue
/// of the transform (zero for exactly Hermitian ρ) exceeds tolerance.
pub fn wigner_transform(rho: &DensityMatrix) -> Result<WignerDistribution> {
    let n = rho.grid.len();
    let dx = rho.grid.spacing();
    let dp = std::f64::consts::PI / (n as f64 * dx);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let scratch_len = fft.get_inplace_scratch_len();

    let src = rho.rho.as_slice().expect("contiguous density matrix");
    let mut values = Array2::<f64>::zeros((n, n));
    let residues: Vec<f64> = values
        .as_slice_mut()
        .unwrap()
        .par_chunks_mut(n)
        .enumerate()
        .map_init(
            || {
                (
                    vec![Complex64::default(); n],
                    vec![Complex64::default(); scratch_len],
                )
            },
            |(buf, scratch), (i, out_row)| {
                for v in buf.iter_mut() {
                    *v = Complex64::default();
                }
                let reach = i.min(n - 1 - i);
                for k in 0..=(2 * reach) {
                    let kt = k as isize - reach as isize;
                    let a = (i as isize + kt) as usize;
                    let b = (i as isize - kt) as usize;
                    let idx = ((kt + n as isize) % n as isize) as usize;
                    buf[idx] = src[a * n + b];
                }
                fft.process_with_scratch(buf, scratch);
                let scale = dx / std::f64::consts::PI;
                let mut imag_max = 0.0f64;
                for (j, out) in out_row.iter_mut().enumerate() {
                    // fftshift: p index j corresponds to DFT bin (j + n/2) mod n
                    let bin = (j + n / 2) % n;
                    *out = buf[bin].re * scale;
                    imag_max = imag_max.max(buf[bin].im.abs() * scale);
                }
                imag_max
            },
        )
        .collect();

    let max_w = values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let max_imag = residues.into_iter().fold(0.0f64, f64::max);
    if max_w > 0.0 && max_imag > IMAG_RESIDUE_TOL * max_w {
        return Err(Error::ImaginaryResidue {
            max: max_imag / max_w,
        });
    }

    let x = rho.grid.positions();
    let p: Vec<f64> = (0..n).map(|j| (j as f64 - (n / 2) as f64) * dp).collect();
    Ok(WignerDistribution {
        x,
        p,
        values,
        dx,
        dp,
    })
}

impl WignerDistribution {
    /// Integral of W over the region where it is negative (signed, <= 0).
    pub fn negative_volume(&self) -> f64 {
        let cell = self.dx * self.dp;
        self.values.iter().filter(|v| **v < 0.0).sum::<f64>() * cell
    }

    /// Total integral (≈ 1).
    pub fn total(&self) -> f64 {
        self.values.sum() * self.dx * self.dp
    }

    /// Marginal over momentum; equals the density-matrix diagonal.
    pub fn marginal_x(&self) -> Vec<f64> {
        self.values
            .rows()
            .into_iter()
            .map(|row| row.sum() * self.dp)
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MAX, f64::min)
    }
}

/// ΔN series: |N(t_k)| - |N(t_0)| for a recorded negativity history.
pub fn negativity_increment(history: &[f64]) -> Vec<f64> {
    if history.is_empty() {
        return Vec::new();
    }
    let n0 = history[0].abs();
    history.iter().map(|n| n.abs() - n0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::grid::QuantumGrid;
    use crate::quantum::state::{prepare_initial_state, InitialState};

    fn grid() -> QuantumGrid {
        QuantumGrid::new(512, 16.0).unwrap()
    }

    #[test]
    fn ground_state_gaussian_nonnegative() {
        let rho = prepare_initial_state(&InitialState::Fock { n: 0 }, &grid()).unwrap();
        let w = wigner_transform(&rho).unwrap();
        assert!((w.total() - 1.0).abs() < 1e-6);
        assert!(w.min_value() > -1e-12, "min = {}", w.min_value());
        assert!(w.negative_volume().abs() < 1e-12);
    }

    #[test]
    fn thermal_state_nonnegative() {
        let rho = prepare_initial_state(&InitialState::Thermal { nbar: 4.52 }, &grid()).unwrap();
        let w = wigner_transform(&rho).unwrap();
        assert!(w.negative_volume().abs() < 1e-9);
    }

    #[test]
    fn fock_one_negativity_closed_form() {
        // N = 1 - 2 e^{-1/2}; central value W(0,0) = -1/π (ħ = 1)
        let rho = prepare_initial_state(&InitialState::Fock { n: 1 }, &grid()).unwrap();
        let w = wigner_transform(&rho).unwrap();
        let expect = 1.0 - 2.0 * (-0.5f64).exp();
        let got = w.negative_volume();
        assert!((got - expect).abs() < 1e-2, "N = {got}, expect {expect}");
        let i0 = w.x.iter().position(|&x| x == 0.0).unwrap();
        let j0 = w.p.iter().position(|&p| p == 0.0).unwrap();
        let w00 = w.values[(i0, j0)];
        assert!(
            (w00 + 1.0 / std::f64::consts::PI).abs() < 1e-3,
            "W(0,0) = {w00}"
        );
    }

    #[test]
    fn marginal_matches_density_diagonal() {
        let rho = prepare_initial_state(
            &InitialState::BlurredFock {
                n_center: 8,
                sigma_n: 2.0,
            },
            &grid(),
        )
        .unwrap();
        let w = wigner_transform(&rho).unwrap();
        let marginal = w.marginal_x();
        let diag = rho.diag_density();
        for (m, d) in marginal.iter().zip(&diag) {
            assert!((m - d).abs() < 1e-8, "marginal {m} vs diag {d}");
        }
        let dx = w.dx;
        let total: f64 = marginal.iter().sum::<f64>() * dx;
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn increment_series() {
        assert!(negativity_increment(&[]).is_empty());
        let s = negativity_increment(&[-0.01, -0.02, -0.05]);
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 0.01).abs() < 1e-15);
        assert!((s[2] - 0.04).abs() < 1e-15);
        let flat = negativity_increment(&[-0.3, -0.3, -0.3]);
        assert!(flat.iter().all(|v| *v == 0.0));
    }
}
