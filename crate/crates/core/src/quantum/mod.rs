//! Open-system quantum dynamics of the pulsed trap on a position grid.
//!
//! The density matrix is kept in the position representation, where both the
//! potential phase and the photon-recoil dephasing factor are exactly
//! diagonal in (x, x'); only the kinetic conjugation needs Fourier
//! transforms. Everything here works in oscillator units (ħ = m = ω = 1);
//! [`grid::OscillatorUnits`] converts at the I/O boundary.

pub mod grid;
pub mod hermite;
pub mod lanczos;
pub mod propagate;
pub mod state;
pub mod wigner;

pub use grid::{OscillatorUnits, QuantumGrid};
pub use propagate::{
    build_hamiltonian_terms, harmonic_terms, propagate, HamiltonianTerms, PropagationResult,
    PropagationSettings,
};
pub use state::{prepare_initial_state, DensityMatrix, InitialState};
pub use wigner::{negativity_increment, wigner_transform, WignerDistribution};
