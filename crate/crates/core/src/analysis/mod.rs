//! Point clouds and time traces → distributions, fits, scalar diagnostics.

pub mod backbone;
pub mod density;
pub mod gaussfit;
pub mod levmar;
pub mod relaxation;
pub mod spectrum;

pub use backbone::{duffing_backbone, BackboneFit};
pub use density::{phase_space_density, position_marginal, Bandwidth, GridSpec, Marginal, PhaseSpaceDistribution};
pub use gaussfit::{ashman_d, fit_double_gaussian, DoubleGaussianFit};
pub use relaxation::{relaxation_time, RelaxationFit};
pub use spectrum::{fit_lorentzian, psd_lorentzian_calibration, welch_psd, SpectrumFit};
