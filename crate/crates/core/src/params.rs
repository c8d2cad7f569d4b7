//! Physical parameter records shared by the classical and quantum simulators.
//!
//! All fields are SI. Records are validated on construction; operations
//! downstream assume the invariants hold.

use serde::{Deserialize, Serialize};

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};

/// Default effective molecular mass of air, kg.
pub const DEFAULT_GAS_MOLECULAR_MASS: f64 = 4.81e-26;

/// Spherical dielectric particle held in the trap.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ParticleSpec {
    /// Radius, m.
    pub radius: f64,
    /// Bulk density, kg/m³.
    pub density: f64,
    /// Refractive index of the particle material.
    pub refractive_index: f64,
}

impl ParticleSpec {
    pub fn new(radius: f64, density: f64, refractive_index: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid_param("particle.radius", "must be > 0"));
        }
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::invalid_param("particle.density", "must be > 0"));
        }
        if !(refractive_index >= 1.0) || !refractive_index.is_finite() {
            return Err(Error::invalid_param(
                "particle.refractive_index",
                "must be >= 1",
            ));
        }
        Ok(ParticleSpec {
            radius,
            density,
            refractive_index,
        })
    }

    /// Volume of the sphere, m³.
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }

    /// Mass, kg.
    pub fn mass(&self) -> f64 {
        self.density * self.volume()
    }
}

/// Residual background gas around the particle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct GasEnvironment {
    /// Pressure, Pa.
    pub pressure: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Molecular mass of the gas, kg.
    pub molecular_mass: f64,
}

impl GasEnvironment {
    pub fn new(pressure: f64, temperature: f64, molecular_mass: f64) -> Result<Self> {
        if !(pressure >= 0.0) || !pressure.is_finite() {
            return Err(Error::invalid_param("gas.pressure", "must be >= 0"));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::invalid_param("gas.temperature", "must be > 0"));
        }
        if !(molecular_mass > 0.0) || !molecular_mass.is_finite() {
            return Err(Error::invalid_param("gas.molecular_mass", "must be > 0"));
        }
        Ok(GasEnvironment {
            pressure,
            temperature,
            molecular_mass,
        })
    }

    /// rms thermal speed of the gas molecules, m/s: sqrt(3 kB T / m_gas).
    pub fn mean_speed(&self) -> f64 {
        (3.0 * BOLTZMANN * self.temperature / self.molecular_mass).sqrt()
    }
}

/// Optical parameters of the trapping beam.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TrapSpec {
    /// Laser wavelength, m.
    pub wavelength: f64,
    /// Beam waist, m.
    pub waist: f64,
    /// Refractive index of the surrounding medium.
    pub medium_index: f64,
    /// Laser power at the high level, W.
    pub power_high: f64,
    /// Laser power at the low level, W.
    pub power_low: f64,
}

impl TrapSpec {
    pub fn new(
        wavelength: f64,
        waist: f64,
        medium_index: f64,
        power_high: f64,
        power_low: f64,
    ) -> Result<Self> {
        if !(wavelength > 0.0) {
            return Err(Error::invalid_param("trap.wavelength", "must be > 0"));
        }
        if !(waist > 0.0) {
            return Err(Error::invalid_param("trap.waist", "must be > 0"));
        }
        if !(medium_index >= 1.0) {
            return Err(Error::invalid_param("trap.medium_index", "must be >= 1"));
        }
        if !(power_high > 0.0) {
            return Err(Error::invalid_param("trap.power_high", "must be > 0"));
        }
        if !(power_low > 0.0 && power_low <= power_high) {
            return Err(Error::invalid_param(
                "trap.power_low",
                "must satisfy 0 < power_low <= power_high",
            ));
        }
        Ok(TrapSpec {
            wavelength,
            waist,
            medium_index,
            power_high,
            power_low,
        })
    }

    /// Modulation depth power_low / power_high, in (0, 1].
    pub fn modulation_depth(&self) -> f64 {
        self.power_low / self.power_high
    }
}

/// Photon-recoil decoherence strength, in either of its two equivalent forms.
///
/// The stored form is preserved; conversions are computed on demand via
/// Γ = Λ·Δx_zpf², so reading back the stored form is exact.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum DecoherenceSpec {
    /// Position-localization constant Λ, Hz/m².
    LambdaRecoil(f64),
    /// Dimensionless ratio Γ/ω.
    GammaOverOmega(f64),
}

impl DecoherenceSpec {
    pub fn validate(&self) -> Result<()> {
        let v = match self {
            DecoherenceSpec::LambdaRecoil(v) => *v,
            DecoherenceSpec::GammaOverOmega(v) => *v,
        };
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid_param("decoherence", "must be >= 0"));
        }
        Ok(())
    }

    /// Λ in Hz/m², given the zero-point fluctuation Δx_zpf (m) and ω (rad/s).
    pub fn lambda(&self, dx_zpf: f64, omega: f64) -> f64 {
        match self {
            DecoherenceSpec::LambdaRecoil(l) => *l,
            DecoherenceSpec::GammaOverOmega(r) => r * omega / (dx_zpf * dx_zpf),
        }
    }

    /// Γ/ω, given Δx_zpf (m) and ω (rad/s).
    pub fn gamma_over_omega(&self, dx_zpf: f64, omega: f64) -> f64 {
        match self {
            DecoherenceSpec::LambdaRecoil(l) => l * dx_zpf * dx_zpf / omega,
            DecoherenceSpec::GammaOverOmega(r) => *r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn particle_mass_values() {
        // direct arithmetic oracle: rho * 4/3 pi r^3
        let p = ParticleSpec::new(50e-9, 2200.0, 1.44).unwrap();
        let oracle = 2200.0 * 4.0 / 3.0 * std::f64::consts::PI * 50e-9f64.powi(3);
        assert_eq!(p.mass(), oracle);
        assert!((p.mass() - 1.152e-18).abs() / 1.152e-18 < 1e-3);

        let p4 = ParticleSpec::new(4e-9, 2200.0, 1.44).unwrap();
        assert!((p4.mass() - 5.90e-22).abs() / 5.90e-22 < 1e-3);
    }

    #[test]
    fn particle_rejects_degenerate() {
        assert!(ParticleSpec::new(0.0, 2200.0, 1.44).is_err());
        assert!(ParticleSpec::new(50e-9, -1.0, 1.44).is_err());
        assert!(ParticleSpec::new(50e-9, 2200.0, 0.9).is_err());
    }

    #[test]
    fn gas_mean_speed() {
        let g = GasEnvironment::new(1.0, 300.0, DEFAULT_GAS_MOLECULAR_MASS).unwrap();
        let oracle = (3.0 * BOLTZMANN * 300.0 / DEFAULT_GAS_MOLECULAR_MASS).sqrt();
        assert_eq!(g.mean_speed(), oracle);
        assert!((g.mean_speed() - 508.0).abs() < 2.0);

        // sqrt scaling in T and mass
        let g4 = GasEnvironment::new(1.0, 1200.0, DEFAULT_GAS_MOLECULAR_MASS).unwrap();
        assert!((g4.mean_speed() / g.mean_speed() - 2.0).abs() < 1e-12);
        let gm = GasEnvironment::new(1.0, 300.0, 4.0 * DEFAULT_GAS_MOLECULAR_MASS).unwrap();
        assert!((gm.mean_speed() / g.mean_speed() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trap_modulation_depth_range() {
        let t = TrapSpec::new(1550e-9, 1e-6, 1.0, 80e-3, 57e-3).unwrap();
        let s = t.modulation_depth();
        assert!(s > 0.0 && s <= 1.0);
        assert!((s - 0.7125).abs() < 1e-12);
        assert!(TrapSpec::new(1550e-9, 1e-6, 1.0, 80e-3, 90e-3).is_err());
    }

    #[test]
    fn decoherence_interconversion() {
        let dx = 0.42e-9;
        let omega = 2.0 * std::f64::consts::PI * 80e3;
        let spec = DecoherenceSpec::LambdaRecoil(3.28e19);
        // stored form reads back exactly
        assert_eq!(spec.lambda(dx, omega), 3.28e19);
        // cross conversion round-trips to within a couple of ulps
        let r = spec.gamma_over_omega(dx, omega);
        let back = DecoherenceSpec::GammaOverOmega(r).lambda(dx, omega);
        assert!((back - 3.28e19).abs() / 3.28e19 < 1e-14);
    }
}
