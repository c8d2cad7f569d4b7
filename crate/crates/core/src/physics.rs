//! Closed-form physics shared by the simulators: gas damping, thermal and
//! quantum length scales, and the photon-recoil decoherence constant.

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::params::{GasEnvironment, ParticleSpec, TrapSpec};

/// Particle mass, kg.
pub fn particle_mass(particle: &ParticleSpec) -> f64 {
    particle.mass()
}

/// rms thermal speed of the gas molecules, m/s.
pub fn mean_gas_speed(gas: &GasEnvironment) -> f64 {
    gas.mean_speed()
}

/// Gas damping rate Γ_m = 64 r² P / (m v̄_gas), 1/s.
pub fn gas_damping_rate(particle: &ParticleSpec, gas: &GasEnvironment) -> f64 {
    64.0 * particle.radius * particle.radius * gas.pressure
        / (particle.mass() * gas.mean_speed())
}

/// Thermal position spread sqrt(kB T / (m ω²)), m.
pub fn thermal_position_std(mass: f64, omega: f64, temperature: f64) -> f64 {
    (BOLTZMANN * temperature / (mass * omega * omega)).sqrt()
}

/// Zero-point fluctuation sqrt(ħ / (2 m ω)), m.
pub fn zero_point_fluctuation(mass: f64, omega: f64) -> f64 {
    (HBAR / (2.0 * mass * omega)).sqrt()
}

/// Position spread of the n-th number state, sqrt(2n+1)·Δx_zpf, m.
pub fn fock_position_std(n: u32, mass: f64, omega: f64) -> f64 {
    ((2 * n + 1) as f64).sqrt() * zero_point_fluctuation(mass, omega)
}

/// Photon-recoil decoherence constant, Hz/m²:
///
/// Λ = (7π ε0 / 30ħ) · (ε_c V E0 / 2π)² · k0⁵
///
/// with ε_c = 3(ε-1)/(ε+2), k0 = 2π/λ and the focal field
/// E0 = sqrt(4 P0 / (π ε0 c w0² Ax Ay)). The relative dielectric constant ε
/// is passed independently of the particle's refractive index.
pub fn recoil_decoherence_constant(
    trap: &TrapSpec,
    particle: &ParticleSpec,
    power: f64,
    asymmetry: (f64, f64),
    dielectric_constant: f64,
) -> f64 {
    let (ax, ay) = asymmetry;
    let eps_c = 3.0 * (dielectric_constant - 1.0) / (dielectric_constant + 2.0);
    let k0 = 2.0 * std::f64::consts::PI / trap.wavelength;
    let e0 = (4.0 * power
        / (std::f64::consts::PI
            * VACUUM_PERMITTIVITY
            * SPEED_OF_LIGHT
            * trap.waist
            * trap.waist
            * ax
            * ay))
        .sqrt();
    let volume = particle.volume();
    7.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY / (30.0 * HBAR)
        * (eps_c * volume * e0 / (2.0 * std::f64::consts::PI)).powi(2)
        * k0.powi(5)
}

/// Decoherence rate Γ = Λ·Δx_zpf², Hz.
pub fn recoil_rate(lambda_recoil: f64, dx_zpf: f64) -> f64 {
    lambda_recoil * dx_zpf * dx_zpf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DEFAULT_GAS_MOLECULAR_MASS;
    use proptest::prelude::*;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn damping_rate_experimental_config() {
        // 460 nm silica sphere at 1e-2 mbar, 300 K air
        let p = ParticleSpec::new(230e-9, 2200.0, 1.44).unwrap();
        let g = GasEnvironment::new(1.0, 300.0, DEFAULT_GAS_MOLECULAR_MASS).unwrap();
        let gamma = gas_damping_rate(&p, &g);
        // arithmetic oracle
        let oracle = 64.0 * 230e-9f64.powi(2) * 1.0 / (p.mass() * g.mean_speed());
        assert_eq!(gamma, oracle);
        assert!(gamma > 50.0 && gamma < 65.0, "gamma = {gamma}");
        let relax = 1.0 / gamma;
        assert!(relax > 15e-3 && relax < 20e-3);
    }

    #[test]
    fn damping_vacuum_limit_and_linearity() {
        let p = ParticleSpec::new(230e-9, 2200.0, 1.44).unwrap();
        let g0 = GasEnvironment::new(0.0, 300.0, DEFAULT_GAS_MOLECULAR_MASS).unwrap();
        assert_eq!(gas_damping_rate(&p, &g0), 0.0);
        let g1 = GasEnvironment::new(1.0, 300.0, DEFAULT_GAS_MOLECULAR_MASS).unwrap();
        let g2 = GasEnvironment::new(2.0, 300.0, DEFAULT_GAS_MOLECULAR_MASS).unwrap();
        let r = gas_damping_rate(&p, &g2) / gas_damping_rate(&p, &g1);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_std_values() {
        let p = ParticleSpec::new(230e-9, 2200.0, 1.44).unwrap();
        let omega = TAU * 77e3;
        let s = thermal_position_std(p.mass(), omega, 300.0);
        let oracle = (BOLTZMANN * 300.0 / (p.mass() * omega * omega)).sqrt();
        assert_eq!(s, oracle);
        assert!((s - 1.256e-8).abs() / 1.256e-8 < 1e-3);
        // sqrt scaling and ground limit
        let s4 = thermal_position_std(p.mass(), omega, 1200.0);
        assert!((s4 / s - 2.0).abs() < 1e-12);
        assert_eq!(thermal_position_std(p.mass(), omega, 0.0), 0.0);
    }

    #[test]
    fn zpf_values() {
        let p50 = ParticleSpec::new(50e-9, 2200.0, 1.44).unwrap();
        let z50 = zero_point_fluctuation(p50.mass(), TAU * 50e3);
        // rounds to 0.01 nm
        assert!((z50 * 1e9 * 100.0).round() / 100.0 == 0.01);

        let p4 = ParticleSpec::new(4e-9, 2200.0, 1.44).unwrap();
        let z4 = zero_point_fluctuation(p4.mass(), TAU * 80e3);
        assert!((z4 - 0.42e-9).abs() / 0.42e-9 < 5e-3);

        let zq = zero_point_fluctuation(4.0 * p4.mass(), TAU * 80e3);
        assert!((zq / z4 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fock_position_std_values() {
        let p4 = ParticleSpec::new(4e-9, 2200.0, 1.44).unwrap();
        let omega = TAU * 80e3;
        let z = zero_point_fluctuation(p4.mass(), omega);
        assert_eq!(fock_position_std(0, p4.mass(), omega), z);
        let d100 = fock_position_std(100, p4.mass(), omega);
        assert!((d100 - 6e-9).abs() / 6e-9 < 0.05);
        let d20 = fock_position_std(20, p4.mass(), omega);
        assert!((d20 / z - 41f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn recoil_constant_reference_value() {
        // R = 4 nm, λ = 1550 nm, P0 = 0.5 W, w0 = 750 nm, ε = 2, Ax=1, Ay=0.9
        let ts = TrapSpec::new(1550e-9, 750e-9, 1.0, 0.5, 0.5).unwrap();
        let ps = ParticleSpec::new(4e-9, 2200.0, 1.44).unwrap();
        let lambda = recoil_decoherence_constant(&ts, &ps, 0.5, (1.0, 0.9), 2.0);
        assert!(
            (lambda - 3.28e19).abs() / 3.28e19 < 0.02,
            "lambda = {lambda:e}"
        );

        // Γ = Λ Δx_zpf² and Γ/ω
        let omega = TAU * 80e3;
        let dx = zero_point_fluctuation(ps.mass(), omega);
        let gamma = recoil_rate(lambda, dx);
        assert!((gamma - 5.8).abs() / 5.8 < 0.02, "gamma = {gamma}");
        assert!((gamma / omega - 1.16e-5).abs() / 1.16e-5 < 0.02);
    }

    #[test]
    fn recoil_scalings() {
        let ts = TrapSpec::new(1550e-9, 750e-9, 1.0, 1.0, 1.0).unwrap();
        let ps = ParticleSpec::new(4e-9, 2200.0, 1.44).unwrap();
        let l1 = recoil_decoherence_constant(&ts, &ps, 0.5, (1.0, 0.9), 2.0);
        let l2 = recoil_decoherence_constant(&ts, &ps, 1.0, (1.0, 0.9), 2.0);
        assert!((l2 / l1 - 2.0).abs() < 1e-12); // linear in power
        let ps2 = ParticleSpec::new(4e-9 * 2f64.cbrt(), 2200.0, 1.44).unwrap(); // V doubled
        let l3 = recoil_decoherence_constant(&ts, &ps2, 0.5, (1.0, 0.9), 2.0);
        assert!((l3 / l1 - 4.0).abs() < 1e-9); // quadratic in volume
        assert_eq!(recoil_rate(0.0, 1e-9), 0.0);
        let g1 = recoil_rate(1e19, 1e-10);
        let g2 = recoil_rate(1e19, 2e-10);
        assert!((g2 / g1 - 4.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn formulas_are_pure(mass in 1e-22f64..1e-15, omega in 1e4f64..1e7, t in 1.0f64..1e3) {
            // same inputs, bit-identical outputs
            prop_assert_eq!(
                thermal_position_std(mass, omega, t).to_bits(),
                thermal_position_std(mass, omega, t).to_bits()
            );
            prop_assert_eq!(
                zero_point_fluctuation(mass, omega).to_bits(),
                zero_point_fluctuation(mass, omega).to_bits()
            );
        }
    }
}
