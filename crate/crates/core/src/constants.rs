//! Physical constants (SI). Fixed values; not user-configurable.

use serde::Serialize;

/// Boltzmann constant, J/K (exact, 2019 SI).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

/// Bundle of the constants above, for echoing into run metadata.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhysicalConstants {
    pub kb: f64,
    pub hbar: f64,
    pub c: f64,
    pub eps0: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        kb: BOLTZMANN,
        hbar: HBAR,
        c: SPEED_OF_LIGHT,
        eps0: VACUUM_PERMITTIVITY,
    };
}
