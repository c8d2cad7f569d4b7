//! Position grid and internal oscillator units.
//!
//! Quantum propagation works in units ħ = m = ω = 1 (lengths in
//! sqrt(ħ/mω) = √2·Δx_zpf, momenta in sqrt(ħmω), time in 1/ω); conversion to
//! SI happens only at the I/O boundary.

use serde::Serialize;

use crate::constants::HBAR;
use crate::error::{Error, Result};

/// Symmetric position grid: x_i = (i - n/2)·dx for i in 0..n, n a power of
/// two. The conjugate momentum grid follows the discrete Fourier convention
/// p_k = 2πk̃/(n·dx), k̃ in [-n/2, n/2).
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct QuantumGrid {
    n: usize,
    dx: f64,
}

impl QuantumGrid {
    /// Grid of `n` points covering [-extent, +extent).
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 128 || !n.is_power_of_two() {
            return Err(Error::invalid_param(
                "quantum.n_points",
                "must be a power of two >= 128",
            ));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::invalid_param("quantum.extent", "must be > 0"));
        }
        Ok(QuantumGrid {
            n,
            dx: 2.0 * extent / n as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.dx
    }

    pub fn x_min(&self) -> f64 {
        self.x(0)
    }

    pub fn x_max(&self) -> f64 {
        self.x_min() + self.n as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Momenta in FFT storage order (0, +, ..., -, ...).
    pub fn momenta_fft_order(&self) -> Vec<f64> {
        let n = self.n as isize;
        (0..n)
            .map(|k| {
                let kt = if k < n / 2 { k } else { k - n };
                2.0 * std::f64::consts::PI * kt as f64 / (self.n as f64 * self.dx)
            })
            .collect()
    }

    /// Largest representable momentum magnitude π/dx.
    pub fn momentum_cutoff(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }
}

/// Scale factors between internal oscillator units and SI.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OscillatorUnits {
    /// Particle mass, kg.
    pub mass: f64,
    /// Reference (harmonic) trap frequency, rad/s.
    pub omega: f64,
}

impl OscillatorUnits {
    /// Length unit sqrt(ħ/mω), m.
    pub fn length(&self) -> f64 {
        (HBAR / (self.mass * self.omega)).sqrt()
    }

    /// Momentum unit sqrt(ħmω), kg·m/s.
    pub fn momentum(&self) -> f64 {
        (HBAR * self.mass * self.omega).sqrt()
    }

    /// Time unit 1/ω, s.
    pub fn time(&self) -> f64 {
        1.0 / self.omega
    }

    /// Energy unit ħω, J.
    pub fn energy(&self) -> f64 {
        HBAR * self.omega
    }

    /// Decoherence constant Λ (Hz/m²) → internal units.
    pub fn lambda_to_internal(&self, lambda_si: f64) -> f64 {
        lambda_si * self.length().powi(2) * self.time()
    }
}
