//! Split-operator propagation of the density matrix.
//!
//! One step of length h applies
//!
//!   ρ ← K(h/2) · V·D(h) · K(h/2)
//!
//! where K conjugates by the kinetic propagator (Fourier transform on both
//! indices), V multiplies by exp(-i·S·[V(x)-V(x')]·h) and D by the
//! photon-recoil dephasing factor exp(-Λ(x-x')²·h); V and D are exactly
//! diagonal in the position representation. Adjacent half-kinetic steps are
//! fused into full steps inside a constant-control segment. Segment
//! boundaries coincide with the control discontinuities and the snapshot
//! times, so neither is rounded to a step edge.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::QuantumGrid;
use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::protocol::PulseProtocol;

/// Kinetic spectrum (FFT order) and potential samples at control S = 1.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    pub kinetic: Vec<f64>,
    pub potential: Vec<f64>,
}

/// Terms for an inverted-Gaussian well of the given depth and waist
/// (internal units: ħ = m = 1, energies in ħω).
///
/// The grid must resolve both the potential (dx <= w0/32) and the momentum
/// content expected during the run: dx <= (π/4)/p_max_expected, i.e. the
/// momentum cutoff π/dx keeps a factor-4 margin above `p_max_expected`.
pub fn build_hamiltonian_terms(
    grid: &QuantumGrid,
    depth: f64,
    waist: f64,
    p_max_expected: f64,
) -> Result<HamiltonianTerms> {
    let dx = grid.spacing();
    if dx > waist / 32.0 {
        return Err(Error::GridResolution(format!(
            "spacing {dx:.4e} exceeds waist/32 = {:.4e}",
            waist / 32.0
        )));
    }
    if p_max_expected > 0.0 && dx > std::f64::consts::FRAC_PI_4 / p_max_expected {
        return Err(Error::GridResolution(format!(
            "spacing {dx:.4e} exceeds (π/4)/p_max = {:.4e}",
            std::f64::consts::FRAC_PI_4 / p_max_expected
        )));
    }
    let potential = (0..grid.len())
        .map(|i| {
            let x = grid.x(i);
            -depth * (-2.0 * x * x / (waist * waist)).exp()
        })
        .collect();
    let kinetic = grid
        .momenta_fft_order()
        .iter()
        .map(|p| 0.5 * p * p)
        .collect();
    Ok(HamiltonianTerms { kinetic, potential })
}

/// Harmonic reference potential V = x²/2 (unitary-limit validation runs).
pub fn harmonic_terms(grid: &QuantumGrid) -> HamiltonianTerms {
    HamiltonianTerms {
        potential: (0..grid.len())
            .map(|i| {
                let x = grid.x(i);
                0.5 * x * x
            })
            .collect(),
        kinetic: grid
            .momenta_fft_order()
            .iter()
            .map(|p| 0.5 * p * p)
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct PropagationSettings {
    /// Maximum substep, internal time units.
    pub max_dt: f64,
    /// Decoherence constant Λ, internal units.
    pub lambda: f64,
    /// Trace/Hermiticity check cadence, in substeps.
    pub check_interval: usize,
    /// Abort when the smallest eigenvalue estimate drops below this.
    pub positivity_floor: f64,
    /// Term toggles (both true for physical runs).
    pub kinetic_enabled: bool,
    pub potential_enabled: bool,
}

impl PropagationSettings {
    pub fn new(max_dt: f64, lambda: f64) -> Self {
        PropagationSettings {
            max_dt,
            lambda,
            check_interval: 200,
            positivity_floor: -1e-6,
            kinetic_enabled: true,
            potential_enabled: true,
        }
    }
}

pub struct PropagationResult {
    pub final_state: DensityMatrix,
    pub snapshots: Vec<(f64, DensityMatrix)>,
    pub steps: u64,
}

const TRACE_TOL: f64 = 1e-9;
const HERMITICITY_TOL: f64 = 1e-10;

struct Engine {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch_len: usize,
    tmp: Array2<Complex64>,
    /// exp(-Λ(x_i-x_j)²·h) for the cached substep length.
    dephasing: Array2<f64>,
    dephasing_h: f64,
}

impl Engine {
    fn new(grid: &QuantumGrid) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Engine {
            n,
            fwd,
            inv,
            scratch_len,
            tmp: Array2::zeros((n, n)),
            dephasing: Array2::zeros((0, 0)),
            dephasing_h: f64::NAN,
        }
    }

    fn fft_rows(&self, data: &mut Array2<Complex64>, forward: bool) {
        let n = self.n;
        let plan = if forward { &self.fwd } else { &self.inv };
        let slice = data.as_slice_mut().expect("contiguous density matrix");
        slice
            .par_chunks_mut(n)
            .for_each_init(
                || vec![Complex64::default(); self.scratch_len],
                |scratch, row| plan.process_with_scratch(row, scratch),
            );
    }

    fn transpose_into_tmp(&mut self, data: &Array2<Complex64>) {
        let n = self.n;
        let src = data.as_slice().unwrap();
        let dst = self.tmp.as_slice_mut().unwrap();
        const BLOCK: usize = 64;
        for ib in (0..n).step_by(BLOCK) {
            for jb in (0..n).step_by(BLOCK) {
                for i in ib..(ib + BLOCK).min(n) {
                    for j in jb..(jb + BLOCK).min(n) {
                        dst[j * n + i] = src[i * n + j];
                    }
                }
            }
        }
    }

    /// Conjugate by the kinetic propagator for time h.
    fn kinetic(&mut self, rho: &mut Array2<Complex64>, kinetic: &[f64], h: f64) {
        let n = self.n;
        let phases: Vec<Complex64> = kinetic
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * h))
            .collect();
        let norm = 1.0 / (n as f64 * n as f64);

        // second index j -> momentum l (inverse transform)
        self.fft_rows(rho, false);
        // first index i -> momentum k: transpose so i runs along rows
        self.transpose_into_tmp(rho);
        std::mem::swap(rho, &mut self.tmp);
        self.fft_rows(rho, true);
        // layout is now [l][k]; apply e^{-i(ε_k - ε_l)h} / N²
        {
            let slice = rho.as_slice_mut().unwrap();
            slice
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(l, row)| {
                    let s = phases[l].conj() * norm;
                    for (k, v) in row.iter_mut().enumerate() {
                        *v *= phases[k] * s;
                    }
                });
        }
        // back: k -> i (inverse), transpose, l -> j (forward)
        self.fft_rows(rho, false);
        self.transpose_into_tmp(rho);
        std::mem::swap(rho, &mut self.tmp);
        self.fft_rows(rho, true);
    }

    fn refresh_dephasing(&mut self, grid: &QuantumGrid, lambda: f64, h: f64) {
        if self.dephasing_h == h && self.dephasing.nrows() == self.n {
            return;
        }
        let n = self.n;
        let xs: Vec<f64> = grid.positions();
        let mut m = Array2::<f64>::zeros((n, n));
        m.as_slice_mut()
            .unwrap()
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, row)| {
                let xi = xs[i];
                for (j, v) in row.iter_mut().enumerate() {
                    let d = xi - xs[j];
                    *v = (-lambda * d * d * h).exp();
                }
            });
        self.dephasing = m;
        self.dephasing_h = h;
    }

    /// Apply the potential phase (at control value s) and the dephasing
    /// factor for time h; both diagonal in (x, x').
    fn potential_dephasing(
        &mut self,
        rho: &mut Array2<Complex64>,
        grid: &QuantumGrid,
        potential: &[f64],
        s: f64,
        lambda: f64,
        h: f64,
        potential_on: bool,
    ) {
        let n = self.n;
        let phases: Vec<Complex64> = if potential_on {
            potential
                .iter()
                .map(|v| Complex64::from_polar(1.0, -s * v * h))
                .collect()
        } else {
            vec![Complex64::new(1.0, 0.0); n]
        };
        let use_dephasing = lambda > 0.0;
        if use_dephasing {
            self.refresh_dephasing(grid, lambda, h);
        }
        let deph = &self.dephasing;
        let slice = rho.as_slice_mut().unwrap();
        slice.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let pi = phases[i];
            if use_dephasing {
                let drow = deph.row(i);
                for (j, v) in row.iter_mut().enumerate() {
                    *v *= pi * phases[j].conj() * drow[j];
                }
            } else {
                for (j, v) in row.iter_mut().enumerate() {
                    *v *= pi * phases[j].conj();
                }
            }
        });
    }
}

fn check_invariants(grid: &QuantumGrid, rho: &Array2<Complex64>, step: u64) -> Result<()> {
    let n = grid.len();
    let trace: f64 = (0..n).map(|i| rho[(i, i)].re).sum::<f64>() * grid.spacing();
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvariantDrift {
            what: "trace",
            value: trace - 1.0,
            tolerance: TRACE_TOL,
            step,
        });
    }
    let mut max_dev = 0.0f64;
    let mut max_mag = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let a = rho[(i, j)];
            max_dev = max_dev.max((a - rho[(j, i)].conj()).norm());
            max_mag = max_mag.max(a.norm());
        }
    }
    let herm = if max_mag > 0.0 { max_dev / max_mag } else { 0.0 };
    if herm > HERMITICITY_TOL {
        return Err(Error::InvariantDrift {
            what: "hermiticity",
            value: herm,
            tolerance: HERMITICITY_TOL,
            step,
        });
    }
    Ok(())
}

/// Propagate to `t_final` (internal time), recording density-matrix
/// snapshots at the requested times. `protocol` timing must be expressed in
/// internal time units; `None` holds the control at 1.
pub fn propagate(
    initial: &DensityMatrix,
    terms: &HamiltonianTerms,
    protocol: Option<&PulseProtocol>,
    t_final: f64,
    snapshot_times: &[f64],
    settings: &PropagationSettings,
) -> Result<PropagationResult> {
    if !(settings.max_dt > 0.0) {
        return Err(Error::invalid_param("quantum.dt", "must be > 0"));
    }
    let grid = initial.grid;
    let mut engine = Engine::new(&grid);
    let mut rho = initial.rho.clone();

    // segment boundaries: control discontinuities plus snapshot times
    let base = match protocol {
        Some(p) => p.segments(t_final),
        None => crate::protocol::PulseProtocol::new(0.5, 1.0, 1.0, 0, 1, 0.0)
            .expect("static protocol")
            .segments(t_final),
    };
    let mut cuts: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_final)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut segments: Vec<(f64, f64, f64)> = Vec::new();
    for seg in &base {
        let mut start = seg.start;
        for &c in cuts.iter().filter(|&&c| c > seg.start && c < seg.end) {
            segments.push((start, c, seg.s));
            start = c;
        }
        segments.push((start, seg.end, seg.s));
    }

    let mut snapshots: Vec<(f64, DensityMatrix)> = Vec::new();
    let mut snap_idx = 0usize;
    let record = |t: f64,
                      rho: &Array2<Complex64>,
                      snap_idx: &mut usize,
                      snapshots: &mut Vec<(f64, DensityMatrix)>|
     -> Result<()> {
        while *snap_idx < snapshot_times.len()
            && snapshot_times[*snap_idx] <= t * (1.0 + 1e-12) + 1e-300
        {
            let state = DensityMatrix {
                grid,
                rho: rho.clone(),
            };
            let min_eig = state.min_eigenvalue_estimate();
            if min_eig < settings.positivity_floor {
                return Err(Error::InvariantDrift {
                    what: "positivity",
                    value: min_eig,
                    tolerance: settings.positivity_floor,
                    step: 0,
                });
            }
            snapshots.push((snapshot_times[*snap_idx], state));
            *snap_idx += 1;
        }
        Ok(())
    };

    record(0.0, &rho, &mut snap_idx, &mut snapshots)?;

    let mut step: u64 = 0;
    for &(t0, t1, s) in &segments {
        let len = t1 - t0;
        if len <= 0.0 {
            continue;
        }
        let n_sub = (len / settings.max_dt).ceil().max(1.0) as u64;
        let h = len / n_sub as f64;
        if settings.kinetic_enabled {
            engine.kinetic(&mut rho, &terms.kinetic, 0.5 * h);
        }
        for k in 0..n_sub {
            engine.potential_dephasing(
                &mut rho,
                &grid,
                &terms.potential,
                s,
                settings.lambda,
                h,
                settings.potential_enabled,
            );
            let closing = k + 1 == n_sub;
            if settings.kinetic_enabled {
                engine.kinetic(&mut rho, &terms.kinetic, if closing { 0.5 * h } else { h });
            }
            step += 1;
            if step % settings.check_interval as u64 == 0 || closing {
                check_invariants(&grid, &rho, step)?;
            }
        }
        record(t1, &rho, &mut snap_idx, &mut snapshots)?;
    }

    let final_state = DensityMatrix { grid, rho };
    Ok(PropagationResult {
        final_state,
        snapshots,
        steps: step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::state::{prepare_initial_state, InitialState};

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn harmonic_period_return() {
        // displaced Gaussian in a harmonic well returns after one period
        let grid = QuantumGrid::new(256, 12.0).unwrap();
        let terms = harmonic_terms(&grid);
        let mut rho0 = prepare_initial_state(&InitialState::Fock { n: 0 }, &grid).unwrap();
        // displace by shifting the wavefunction two sites
        let n = grid.len();
        let shift = 8usize; // 8·dx ≈ 0.75 internal units
        let mut shifted = Array2::<Complex64>::zeros((n, n));
        for i in shift..n {
            for j in shift..n {
                shifted[(i, j)] = rho0.rho[(i - shift, j - shift)];
            }
        }
        rho0.rho = shifted;
        let settings = PropagationSettings::new(TAU / 4000.0, 0.0);
        let out = propagate(&rho0, &terms, None, TAU, &[], &settings).unwrap();
        // overlap fidelity for pure states: Tr(ρ ρ')·dx²
        let dx = grid.spacing();
        let overlap: f64 = rho0
            .rho
            .iter()
            .zip(out.final_state.rho.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
            * dx
            * dx;
        let trace_distance = (1.0 - overlap).max(0.0).sqrt();
        assert!(trace_distance < 1e-6, "trace distance {trace_distance}");
    }

    #[test]
    fn unitary_purity_constant() {
        let grid = QuantumGrid::new(256, 16.0).unwrap();
        let terms = harmonic_terms(&grid);
        let rho0 = prepare_initial_state(&InitialState::Thermal { nbar: 2.0 }, &grid).unwrap();
        let p0 = rho0.purity();
        let settings = PropagationSettings::new(TAU / 2000.0, 0.0);
        let out = propagate(&rho0, &terms, None, 3.0 * TAU, &[], &settings).unwrap();
        let p1 = out.final_state.purity();
        assert!((p1 - p0).abs() < 1e-8, "purity drift {}", p1 - p0);
    }

    #[test]
    fn pure_dephasing_rate_exact() {
        // kinetic and potential off: ρ(x,x',t) = ρ0 · exp(-Λ(x-x')² t)
        let grid = QuantumGrid::new(128, 10.0).unwrap();
        let terms = harmonic_terms(&grid);
        let rho0 = prepare_initial_state(&InitialState::Fock { n: 1 }, &grid).unwrap();
        let lambda = 0.02;
        let t = 1.5;
        let mut settings = PropagationSettings::new(t / 100.0, lambda);
        settings.kinetic_enabled = false;
        settings.potential_enabled = false;
        let out = propagate(&rho0, &terms, None, t, &[], &settings).unwrap();
        let (i, j) = (30usize, 90usize);
        let d = grid.x(i) - grid.x(j);
        let expect = rho0.rho[(i, j)] * (-lambda * d * d * t).exp();
        let got = out.final_state.rho[(i, j)];
        assert!(
            (got - expect).norm() <= 1e-12 * expect.norm().max(1e-12),
            "got {got}, expect {expect}"
        );
    }

    #[test]
    fn dephasing_scaling_with_lambda() {
        // doubling Λ doubles the decay rate of a fixed coherence
        let grid = QuantumGrid::new(128, 10.0).unwrap();
        let terms = harmonic_terms(&grid);
        let rho0 = prepare_initial_state(&InitialState::Fock { n: 0 }, &grid).unwrap();
        let t = 0.8;
        let run = |lambda: f64| {
            let mut settings = PropagationSettings::new(t / 64.0, lambda);
            settings.kinetic_enabled = false;
            settings.potential_enabled = false;
            let out = propagate(&rho0, &terms, None, t, &[], &settings).unwrap();
            let (i, j) = (40usize, 80usize);
            (out.final_state.rho[(i, j)].norm() / rho0.rho[(i, j)].norm()).ln() / t
        };
        let r1 = run(0.01);
        let r2 = run(0.02);
        assert!((r2 / r1 - 2.0).abs() < 0.02, "ratio {}", r2 / r1);
    }

    #[test]
    fn grid_resolution_preconditions() {
        let grid = QuantumGrid::new(128, 20.0).unwrap(); // dx = 0.3125
        // waist/32 = 0.25 < dx
        assert!(matches!(
            build_hamiltonian_terms(&grid, 100.0, 8.0, 1.0),
            Err(Error::GridResolution(_))
        ));
        // momentum precondition
        assert!(matches!(
            build_hamiltonian_terms(&grid, 100.0, 20.0, 10.0),
            Err(Error::GridResolution(_))
        ));
        assert!(build_hamiltonian_terms(&grid, 100.0, 20.0, 2.0).is_ok());
    }

    #[test]
    fn potential_minimum_and_harmonic_match() {
        let grid = QuantumGrid::new(512, 27.0).unwrap();
        let depth = 100.0f64;
        let waist = 2.0 * depth.sqrt();
        let terms = build_hamiltonian_terms(&grid, depth, waist, 5.0).unwrap();
        let i0 = grid.len() / 2;
        assert_eq!(terms.potential[i0], -depth);
        // curvature at the minimum reproduces ω = 1: finite difference of V
        let dx = grid.spacing();
        let v2 = (terms.potential[i0 + 1] - 2.0 * terms.potential[i0]
            + terms.potential[i0 - 1])
            / (dx * dx);
        assert!((v2 - 1.0).abs() < 1e-4, "V''(0) = {v2}");
    }
}
