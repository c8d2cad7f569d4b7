//! Inverted-Gaussian optical trap model.
//!
//! The potential is U(x) = -U0 exp(-2x²/w0²): harmonic near the focus with
//! ω = sqrt(4 U0 / (m w0²)), softening toward the flat edges. A trap can be
//! constructed either from beam optics (Rayleigh-regime polarizability) or
//! from calibrated effective parameters (ω together with the Duffing
//! coefficient ξ or the depth ratio U0/ħω).

use serde::Serialize;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::params::{ParticleSpec, TrapSpec};

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct InvertedGaussianTrap {
    /// Well depth U0, J (positive for a particle denser than the medium).
    depth: f64,
    /// Beam waist w0, m.
    waist: f64,
}

impl InvertedGaussianTrap {
    pub fn new(depth: f64, waist: f64) -> Result<Self> {
        if !(depth > 0.0) || !depth.is_finite() {
            return Err(Error::invalid_param("trap.depth", "must be > 0"));
        }
        if !(waist > 0.0) || !waist.is_finite() {
            return Err(Error::invalid_param("trap.waist", "must be > 0"));
        }
        Ok(InvertedGaussianTrap { depth, waist })
    }

    /// Build from beam optics at the given power (W).
    pub fn from_optics(trap: &TrapSpec, particle: &ParticleSpec, power: f64) -> Result<Self> {
        let depth = trap_depth(trap, particle, power);
        if !(depth > 0.0) {
            return Err(Error::invalid_param(
                "trap",
                "optical parameters give a non-positive well depth",
            ));
        }
        InvertedGaussianTrap::new(depth, trap.waist)
    }

    /// Build from a measured trap frequency (rad/s) and Duffing coefficient
    /// ξ (1/m², negative) in the convention F/m = -ω²(x + ξx³).
    pub fn from_frequency_and_xi(omega: f64, xi: f64, mass: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::invalid_param("trap.frequency", "must be > 0"));
        }
        if !(xi < 0.0) {
            return Err(Error::invalid_param(
                "trap.duffing_xi",
                "must be < 0 for an inverted-Gaussian trap (softening)",
            ));
        }
        let waist = (-2.0 / xi).sqrt();
        let depth = mass * omega * omega * waist * waist / 4.0;
        InvertedGaussianTrap::new(depth, waist)
    }

    /// Build from a trap frequency (rad/s) and the depth ratio U0/ħω.
    pub fn from_frequency_and_depth_ratio(omega: f64, ratio: f64, mass: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::invalid_param("trap.frequency", "must be > 0"));
        }
        if !(ratio > 0.0) {
            return Err(Error::invalid_param(
                "trap.depth_over_hbar_omega",
                "must be > 0",
            ));
        }
        let depth = ratio * HBAR * omega;
        // ω² = 4 U0 / (m w0²)  =>  w0 = 2 sqrt(U0/m) / ω
        let waist = 2.0 * (depth / mass).sqrt() / omega;
        InvertedGaussianTrap::new(depth, waist)
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    /// U(x) = -U0 exp(-2x²/w0²), J.
    pub fn potential(&self, x: f64) -> f64 {
        -self.depth * (-2.0 * x * x / (self.waist * self.waist)).exp()
    }

    /// F(x) = -dU/dx, N. Restoring: F(x)·x <= 0.
    pub fn force(&self, x: f64) -> f64 {
        let w2 = self.waist * self.waist;
        -4.0 * self.depth * x / w2 * (-2.0 * x * x / w2).exp()
    }

    /// Harmonic frequency at the well bottom, rad/s.
    pub fn frequency(&self, mass: f64) -> f64 {
        (4.0 * self.depth / (mass * self.waist * self.waist)).sqrt()
    }

    /// Duffing coefficient of the cubic force correction, 1/m²:
    /// F/m = -ω²(x + ξx³) with ξ = -2/w0².
    pub fn duffing_xi(&self) -> f64 {
        -2.0 / (self.waist * self.waist)
    }

    /// Same trap with the depth scaled by the control value S.
    pub fn scaled(&self, s: f64) -> InvertedGaussianTrap {
        InvertedGaussianTrap {
            depth: self.depth * s,
            waist: self.waist,
        }
    }
}

/// Clausius–Mossotti factor (n_r² - 1)/(n_r² + 2) for the relative index
/// n_r = n_p/n_m.
fn clausius_mossotti(trap: &TrapSpec, particle: &ParticleSpec) -> f64 {
    let nr = particle.refractive_index / trap.medium_index;
    let nr2 = nr * nr;
    (nr2 - 1.0) / (nr2 + 2.0)
}

/// Well depth U0 (J) of the optical potential at the given power (W):
/// U0 = (2π n_m r³ / c) · (n_r²-1)/(n_r²+2) · I0 with I0 = 2P/(π w0²).
pub fn trap_depth(trap: &TrapSpec, particle: &ParticleSpec, power: f64) -> f64 {
    let i0 = 2.0 * power / (std::f64::consts::PI * trap.waist * trap.waist);
    2.0 * std::f64::consts::PI * trap.medium_index * particle.radius.powi(3) / SPEED_OF_LIGHT
        * clausius_mossotti(trap, particle)
        * i0
}

/// Gradient force (N) at position x for the Gaussian-beam intensity profile:
/// F(x) = (2π n_m r³/c) · (n_r²-1)/(n_r²+2) · ∂I/∂x.
pub fn gradient_force(x: f64, trap: &TrapSpec, particle: &ParticleSpec, power: f64) -> f64 {
    let w2 = trap.waist * trap.waist;
    let i0 = 2.0 * power / (std::f64::consts::PI * w2);
    let di_dx = i0 * (-4.0 * x / w2) * (-2.0 * x * x / w2).exp();
    2.0 * std::f64::consts::PI * trap.medium_index * particle.radius.powi(3) / SPEED_OF_LIGHT
        * clausius_mossotti(trap, particle)
        * di_dx
}

/// Harmonic trap frequency (rad/s) at the given power.
pub fn trap_frequency(trap: &TrapSpec, particle: &ParticleSpec, power: f64) -> f64 {
    let u0 = trap_depth(trap, particle, power);
    (4.0 * u0 / (particle.mass() * trap.waist * trap.waist)).sqrt()
}

/// Model Duffing coefficient ξ = -2/w0² (1/m²) of the inverted-Gaussian trap.
/// A measured trap may carry a different empirical value; see
/// [`InvertedGaussianTrap::from_frequency_and_xi`].
pub fn duffing_coefficient(trap: &TrapSpec) -> f64 {
    -2.0 / (trap.waist * trap.waist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (TrapSpec, ParticleSpec) {
        (
            TrapSpec::new(1550e-9, 1e-6, 1.0, 80e-3, 57e-3).unwrap(),
            ParticleSpec::new(100e-9, 2200.0, 1.44).unwrap(),
        )
    }

    #[test]
    fn force_is_minus_potential_gradient() {
        // central finite difference oracle over |x| <= 4 w0
        let (ts, ps) = sample();
        let trap = InvertedGaussianTrap::from_optics(&ts, &ps, ts.power_high).unwrap();
        let h = 1e-12;
        for k in -40..=40 {
            let x = k as f64 * 0.1 * ts.waist;
            let fd = -(trap.potential(x + h) - trap.potential(x - h)) / (2.0 * h);
            let f = trap.force(x);
            let scale = f.abs().max(trap.depth / ts.waist);
            assert!(
                (f - fd).abs() / scale < 1e-6,
                "x={x:e}: force {f:e} vs finite difference {fd:e}"
            );
        }
    }

    #[test]
    fn force_matches_intensity_gradient_form() {
        let (ts, ps) = sample();
        let trap = InvertedGaussianTrap::from_optics(&ts, &ps, ts.power_high).unwrap();
        for k in [-3.0, -0.5, 0.7, 2.0] {
            let x = k * ts.waist;
            let a = trap.force(x);
            let b = gradient_force(x, &ts, &ps, ts.power_high);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
        }
    }

    #[test]
    fn force_odd_and_restoring() {
        let (ts, ps) = sample();
        assert_eq!(gradient_force(0.0, &ts, &ps, ts.power_high), 0.0);
        for x in [1e-8, 3e-7, 2e-6] {
            let fp = gradient_force(x, &ts, &ps, ts.power_high);
            let fm = gradient_force(-x, &ts, &ps, ts.power_high);
            assert!((fp + fm).abs() < 1e-12 * fp.abs().max(1e-300));
            assert!(fp * x <= 0.0);
        }
    }

    #[test]
    fn depth_linear_in_power_and_positive() {
        let (ts, ps) = sample();
        let u1 = trap_depth(&ts, &ps, 80e-3);
        let u2 = trap_depth(&ts, &ps, 40e-3);
        assert!((u1 / u2 - 2.0).abs() < 1e-12);
        assert!(u1 > 0.0); // n_p > n_m
    }

    #[test]
    fn frequency_sqrt_power_scaling() {
        let (ts, ps) = sample();
        for s in [0.1, 0.5, 0.71, 1.0] {
            let r = trap_frequency(&ts, &ps, s * ts.power_high)
                / trap_frequency(&ts, &ps, ts.power_high);
            assert!((r - s.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn duffing_model_value() {
        let ts = TrapSpec::new(1550e-9, 1e-6, 1.0, 80e-3, 57e-3).unwrap();
        let xi = duffing_coefficient(&ts);
        assert!((xi - (-2e12)).abs() / 2e12 < 1e-12); // w0 = 1 um -> -2 um^-2
        assert!(xi < 0.0);
    }

    #[test]
    fn calibrated_construction_consistency() {
        // ω and ξ round-trip through the constructor
        let mass = 1.1e-16;
        let omega = 2.0 * std::f64::consts::PI * 77e3;
        let xi = -0.1e12;
        let trap = InvertedGaussianTrap::from_frequency_and_xi(omega, xi, mass).unwrap();
        assert!((trap.frequency(mass) - omega).abs() / omega < 1e-12);
        assert!((trap.duffing_xi() - xi).abs() / xi.abs() < 1e-12);

        // depth-ratio form: U0/ħω comes back out
        let trap2 =
            InvertedGaussianTrap::from_frequency_and_depth_ratio(omega, 100.0, mass).unwrap();
        assert!((trap2.depth() / (HBAR * omega) - 100.0).abs() < 1e-9);
        assert!((trap2.frequency(mass) - omega).abs() / omega < 1e-12);
    }
}
