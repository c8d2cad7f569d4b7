//! Simulation and analysis toolkit for pulsed trap-stiffness modulation of an
//! optically levitated nanoparticle.
//!
//! The crate covers three layers:
//!
//! * **Classical dynamics** — stochastic (Langevin) trajectory ensembles in an
//!   inverted-Gaussian optical trap whose depth is switched by a square-wave
//!   control, producing stroboscopic phase-space point clouds
//!   ([`classical`]).
//! * **Analysis** — phase-space densities, double-Gaussian bimodality fits,
//!   spectral (Lorentzian) calibration, relaxation times and the Duffing
//!   backbone ([`analysis`]).
//! * **Quantum dynamics** — position-grid density-matrix propagation of the
//!   same protocol with photon-recoil dephasing, Wigner transforms and
//!   negativity diagnostics ([`quantum`]).
//!
//! [`config`] and [`pipeline`] tie the layers to the on-disk config schema
//! and artifact files used by the `levipulse` CLI.

pub mod analysis;
pub mod classical;
pub mod config;
pub mod constants;
pub mod error;
pub mod output;
pub mod params;
pub mod physics;
pub mod pipeline;
pub mod protocol;
pub mod quantum;
pub mod trap;

pub use error::{Error, Result};
