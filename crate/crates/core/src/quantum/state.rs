//! Density matrices on the position grid and the initial-state zoo.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::QuantumGrid;
use super::hermite::hermite_functions;
use super::lanczos;
use crate::error::{Error, Result};

/// Initial motional state. Widths and numbers refer to the harmonic
/// approximation of the trap; `Gaussian` takes its position spread in
/// internal length units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    /// Thermal mixture with mean occupation n̄.
    Thermal { nbar: f64 },
    /// Pure number state |n⟩.
    Fock { n: usize },
    /// Gaussian mixture of number states centered on `n_center` with weight
    /// std `sigma_n`.
    BlurredFock { n_center: usize, sigma_n: f64 },
    /// Pure minimum-uncertainty wavepacket of position spread `width`
    /// (internal units; Δx_zpf = 1/√2).
    Gaussian { width: f64 },
}

impl InitialState {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialState::Thermal { nbar } if !(*nbar >= 0.0) => {
                Err(Error::invalid_param("initial_state.nbar", "must be >= 0"))
            }
            InitialState::BlurredFock { sigma_n, .. } if !(*sigma_n > 0.0) => {
                Err(Error::invalid_param("initial_state.sigma_n", "must be > 0"))
            }
            InitialState::Gaussian { width } if !(*width > 0.0) => {
                Err(Error::invalid_param("initial_state.width", "must be > 0"))
            }
            _ => Ok(()),
        }
    }

    /// Number-state weights (n, q_n) with Σq = 1; `None` for pure Gaussians.
    pub fn fock_weights(&self) -> Option<Vec<(usize, f64)>> {
        match *self {
            InitialState::Thermal { nbar } => {
                if nbar == 0.0 {
                    return Some(vec![(0, 1.0)]);
                }
                let ratio = nbar / (1.0 + nbar);
                let mut weights = Vec::new();
                let mut q = 1.0 / (1.0 + nbar);
                let mut total = 0.0;
                let mut n = 0usize;
                while total < 1.0 - 1e-12 && n < 100_000 {
                    weights.push((n, q));
                    total += q;
                    q *= ratio;
                    n += 1;
                }
                let norm: f64 = weights.iter().map(|w| w.1).sum();
                Some(weights.into_iter().map(|(n, q)| (n, q / norm)).collect())
            }
            InitialState::Fock { n } => Some(vec![(n, 1.0)]),
            InitialState::BlurredFock { n_center, sigma_n } => {
                let reach = (6.0 * sigma_n).ceil() as usize;
                let lo = n_center.saturating_sub(reach);
                let hi = n_center + reach;
                let mut weights: Vec<(usize, f64)> = (lo..=hi)
                    .map(|n| {
                        let d = n as f64 - n_center as f64;
                        (n, (-d * d / (2.0 * sigma_n * sigma_n)).exp())
                    })
                    .collect();
                let norm: f64 = weights.iter().map(|w| w.1).sum();
                for w in &mut weights {
                    w.1 /= norm;
                }
                Some(weights)
            }
            InitialState::Gaussian { .. } => None,
        }
    }

    /// Position variance of the state, internal units.
    pub fn position_variance(&self) -> f64 {
        match self.fock_weights() {
            Some(w) => w.iter().map(|(n, q)| q * (*n as f64 + 0.5)).sum(),
            None => match *self {
                InitialState::Gaussian { width } => width * width,
                _ => unreachable!(),
            },
        }
    }

    /// Momentum std of the state, internal units (equal to the position std
    /// for every state in the zoo).
    pub fn momentum_std(&self) -> f64 {
        self.position_variance().sqrt()
    }
}

/// Position-representation density matrix: elements ρ(x_i, x_j), normalized
/// so that Tr(ρ)·dx = 1.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub grid: QuantumGrid,
    pub rho: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn trace(&self) -> f64 {
        let dx = self.grid.spacing();
        (0..self.grid.len()).map(|i| self.rho[(i, i)].re).sum::<f64>() * dx
    }

    /// Tr(ρ²)·dx² = Σ|ρ_ij|²·dx² for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        let dx = self.grid.spacing();
        self.rho.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx * dx
    }

    /// Diagonal probability density ρ(x_i, x_i).
    pub fn diag_density(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.rho[(i, i)].re).collect()
    }

    pub fn position_std(&self) -> f64 {
        let dx = self.grid.spacing();
        let diag = self.diag_density();
        let mean: f64 = diag
            .iter()
            .enumerate()
            .map(|(i, d)| self.grid.x(i) * d)
            .sum::<f64>()
            * dx;
        let var: f64 = diag
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let x = self.grid.x(i) - mean;
                x * x * d
            })
            .sum::<f64>()
            * dx;
        var.sqrt()
    }

    /// max |ρ - ρ†| over all elements, normalized by the largest magnitude.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.grid.len();
        let mut max_dev = 0.0f64;
        let mut max_mag = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let a = self.rho[(i, j)];
                let b = self.rho[(j, i)].conj();
                max_dev = max_dev.max((a - b).norm());
                max_mag = max_mag.max(a.norm());
            }
        }
        if max_mag > 0.0 {
            max_dev / max_mag
        } else {
            0.0
        }
    }

    /// Lanczos estimate of the smallest eigenvalue of the density operator
    /// (probability normalization: eigenvalues sum to 1).
    pub fn min_eigenvalue_estimate(&self) -> f64 {
        lanczos::min_eigenvalue(&self.rho, 64) * self.grid.spacing()
    }

    /// Populations ⟨n|ρ|n⟩·dx² against the harmonic eigenstates, n = 0..=n_max.
    pub fn fock_populations(&self, n_max: usize) -> Vec<f64> {
        let psi = hermite_functions(&self.grid, n_max);
        let dx = self.grid.spacing();
        let n_pts = self.grid.len();
        (0..=n_max)
            .map(|n| {
                let mut acc = Complex64::default();
                for i in 0..n_pts {
                    let pi = psi[(n, i)];
                    if pi == 0.0 {
                        continue;
                    }
                    let mut row_acc = Complex64::default();
                    for j in 0..n_pts {
                        row_acc += self.rho[(i, j)] * psi[(n, j)];
                    }
                    acc += pi * row_acc;
                }
                (acc.re * dx * dx).max(0.0)
            })
            .collect()
    }
}

/// Edge-tail threshold for initial states, relative to the peak density.
const EDGE_TAIL_LIMIT: f64 = 1e-12;

/// Build the initial density matrix on the grid. Errors if the state's tails
/// are not resolved at the grid edges.
pub fn prepare_initial_state(spec: &InitialState, grid: &QuantumGrid) -> Result<DensityMatrix> {
    spec.validate()?;
    let n_pts = grid.len();
    let mut rho = Array2::<Complex64>::zeros((n_pts, n_pts));
    match spec.fock_weights() {
        Some(weights) => {
            let n_max = weights.iter().map(|w| w.0).max().unwrap_or(0);
            let psi = hermite_functions(grid, n_max);
            for (n, q) in weights {
                if q == 0.0 {
                    continue;
                }
                for i in 0..n_pts {
                    let a = psi[(n, i)];
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..n_pts {
                        rho[(i, j)] += Complex64::new(q * a * psi[(n, j)], 0.0);
                    }
                }
            }
        }
        None => {
            let width = match *spec {
                InitialState::Gaussian { width } => width,
                _ => unreachable!(),
            };
            let norm = (2.0 * std::f64::consts::PI * width * width).powf(-0.25);
            let psi: Vec<f64> = (0..n_pts)
                .map(|i| {
                    let x = grid.x(i);
                    norm * (-x * x / (4.0 * width * width)).exp()
                })
                .collect();
            let grid_norm = (psi.iter().map(|v| v * v).sum::<f64>() * grid.spacing()).sqrt();
            for i in 0..n_pts {
                for j in 0..n_pts {
                    rho[(i, j)] =
                        Complex64::new(psi[i] * psi[j] / (grid_norm * grid_norm), 0.0);
                }
            }
        }
    }
    let dm = DensityMatrix { grid: *grid, rho };
    let diag = dm.diag_density();
    let peak = diag.iter().cloned().fold(0.0f64, f64::max);
    let edge = diag[0].max(diag[n_pts - 1]);
    if peak <= 0.0 || edge > EDGE_TAIL_LIMIT * peak {
        return Err(Error::TailsNotResolved {
            edge_density: edge / peak.max(f64::MIN_POSITIVE),
        });
    }
    Ok(dm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> QuantumGrid {
        QuantumGrid::new(512, 27.0).unwrap()
    }

    #[test]
    fn thermal_purity_matches_geometric_series() {
        let g = grid();
        let rho = prepare_initial_state(&InitialState::Thermal { nbar: 4.52 }, &g).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-9);
        let purity = rho.purity();
        let expect = 1.0 / (2.0 * 4.52 + 1.0);
        assert!(
            (purity - expect).abs() / expect < 1e-3,
            "purity = {purity}, expect {expect}"
        );
    }

    #[test]
    fn fock_ground_state_width() {
        let g = grid();
        let rho = prepare_initial_state(&InitialState::Fock { n: 0 }, &g).unwrap();
        // Δx_zpf = 1/√2 internal
        let std = rho.position_std();
        assert!((std - 0.5f64.sqrt()).abs() < 1e-6);
        assert!((rho.purity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn blurred_fock_width_and_populations() {
        let g = grid();
        let spec = InitialState::BlurredFock {
            n_center: 20,
            sigma_n: 5.0,
        };
        let rho = prepare_initial_state(&spec, &g).unwrap();
        // <x²> = Σ q_n (n + 1/2); symmetric weights keep it ~ 20.5
        let var = rho.position_std().powi(2);
        assert!(
            (var - spec.position_variance()).abs() / var < 1e-6,
            "var = {var}"
        );
        assert!((var - 20.5).abs() < 0.3);
        // population distribution is the Gaussian bump
        let pops = rho.fock_populations(45);
        let (imax, _) = pops
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(imax, 20);
        let total: f64 = pops.iter().sum();
        assert!(total <= 1.0 + 1e-6 && total > 0.99);
    }

    #[test]
    fn fock_populations_pure_state() {
        let g = grid();
        let rho = prepare_initial_state(&InitialState::Fock { n: 20 }, &g).unwrap();
        let pops = rho.fock_populations(30);
        assert!((pops[20] - 1.0).abs() < 1e-8);
        for (n, &p) in pops.iter().enumerate() {
            if n != 20 {
                assert!(p < 1e-9, "P({n}) = {p}");
            }
        }
    }

    #[test]
    fn thermal_populations_geometric() {
        let g = grid();
        let nbar = 4.52;
        let rho = prepare_initial_state(&InitialState::Thermal { nbar }, &g).unwrap();
        let pops = rho.fock_populations(10);
        for (n, &p) in pops.iter().enumerate() {
            let expect = nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1);
            assert!((p - expect).abs() / expect < 1e-6, "P({n}) = {p} vs {expect}");
        }
    }

    #[test]
    fn gaussian_state_width() {
        let g = grid();
        let rho = prepare_initial_state(&InitialState::Gaussian { width: 1.7 }, &g).unwrap();
        assert!((rho.position_std() - 1.7).abs() < 1e-9);
        assert!((rho.purity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unresolved_tails_error() {
        let tiny = QuantumGrid::new(128, 3.0).unwrap();
        let spec = InitialState::BlurredFock {
            n_center: 20,
            sigma_n: 5.0,
        };
        match prepare_initial_state(&spec, &tiny) {
            Err(Error::TailsNotResolved { .. }) => {}
            other => panic!("expected TailsNotResolved, got {other:?}"),
        }
    }

    #[test]
    fn hermitian_and_positive() {
        let g = grid();
        let rho = prepare_initial_state(&InitialState::Thermal { nbar: 2.0 }, &g).unwrap();
        assert!(rho.hermiticity_error() < 1e-12);
        assert!(rho.min_eigenvalue_estimate() > -1e-10);
    }
}
