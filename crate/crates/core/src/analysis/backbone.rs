//! Duffing backbone estimation from trajectory zero crossings.
//!
//! Cycle-by-cycle instantaneous frequency (from successive upward zero
//! crossings, linearly interpolated) against squared amplitude, fitted with
//! ω(A) = ω0·(1 + (3ξ/8)·A²).

use serde::Serialize;

use crate::classical::Trajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct BackboneFit {
    /// Small-amplitude frequency, rad/s.
    pub omega0: f64,
    /// Duffing coefficient ξ, 1/m².
    pub xi: f64,
    pub n_cycles: usize,
}

/// (A², ω) samples from one trajectory: each full cycle between successive
/// upward zero crossings yields one point.
fn cycle_points(traj: &Trajectory) -> Vec<(f64, f64)> {
    let x = &traj.positions;
    let t = &traj.times;
    let mut crossings = Vec::new();
    for i in 1..x.len() {
        if x[i - 1] < 0.0 && x[i] >= 0.0 {
            let frac = -x[i - 1] / (x[i] - x[i - 1]);
            crossings.push((i, t[i - 1] + frac * (t[i] - t[i - 1])));
        }
    }
    let mut points = Vec::new();
    for w in crossings.windows(2) {
        let (i0, t0) = w[0];
        let (i1, t1) = w[1];
        let period = t1 - t0;
        if period <= 0.0 {
            continue;
        }
        let amp = x[i0..i1].iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        points.push((amp * amp, 2.0 * std::f64::consts::PI / period));
    }
    points
}

/// Estimate ξ from a set of trajectories spanning a range of amplitudes.
pub fn duffing_backbone(trajectories: &[Trajectory]) -> Result<BackboneFit> {
    let mut pts: Vec<(f64, f64)> = trajectories.iter().flat_map(cycle_points).collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData {
            what: "Duffing backbone",
            message: format!("only {} full cycles found", pts.len()),
        });
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let a2_max = pts.last().unwrap().0;
    let a2_min = pts.first().unwrap().0;
    if !(a2_max > 0.0) || (a2_max - a2_min) < 0.05 * a2_max {
        return Err(Error::InsufficientData {
            what: "Duffing backbone",
            message: "insufficient amplitude spread across cycles".into(),
        });
    }
    // least-squares line omega = a + b·A²
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::InsufficientData {
            what: "Duffing backbone",
            message: "amplitude spread numerically degenerate".into(),
        });
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Ok(BackboneFit {
        omega0: intercept,
        xi: 8.0 / 3.0 * slope / intercept,
        n_cycles: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{simulate_trajectory, ForceModel, IntegrationScheme, LangevinSystem, SimConfig};
    use crate::protocol::PulseProtocol;
    use crate::trap::InvertedGaussianTrap;

    fn noiseless_system(force_model: ForceModel) -> LangevinSystem {
        let mass = 1.12e-16;
        let omega = 2.0 * std::f64::consts::PI * 77e3;
        let trap = InvertedGaussianTrap::from_frequency_and_xi(omega, -0.3e12, mass).unwrap();
        LangevinSystem {
            mass,
            damping: 0.0,
            temperature: 0.0,
            trap,
            force_model,
        }
    }

    fn run_amplitudes(sys: &LangevinSystem, amps: &[f64]) -> Vec<Trajectory> {
        let omega = sys.omega_high();
        let period = 2.0 * std::f64::consts::PI / omega;
        let protocol = PulseProtocol::new(0.5, 1.0, 1.0, 0, 1, 0.0).unwrap();
        let cfg = SimConfig {
            dt: period / 1000.0,
            duration: 30.0 * period,
            snapshot_times: vec![],
            n_trajectories: 1,
            master_seed: 0,
            escape_bound: 10.0 * sys.trap.waist(),
            record_stride: 1,
            scheme: IntegrationScheme::SemiImplicit,
        };
        amps.iter()
            .map(|&a| simulate_trajectory((a, 0.0), 1, &protocol, &cfg, sys).unwrap())
            .collect()
    }

    #[test]
    fn recovers_softening_coefficient() {
        let sys = noiseless_system(ForceModel::Gaussian);
        let w0 = sys.trap.waist();
        // amplitudes up to ~0.3 waist keep the cubic term dominant
        let amps: Vec<f64> = (1..=8).map(|k| k as f64 * 0.04 * w0).collect();
        let trajs = run_amplitudes(&sys, &amps);
        let fit = duffing_backbone(&trajs).unwrap();
        let xi_true = sys.trap.duffing_xi();
        assert!(
            (fit.xi - xi_true).abs() / xi_true.abs() < 0.10,
            "xi = {:.3e} vs {:.3e}",
            fit.xi,
            xi_true
        );
        assert!(fit.xi < 0.0);
        assert!((fit.omega0 - sys.omega_high()).abs() / sys.omega_high() < 0.01);
    }

    #[test]
    fn harmonic_trajectories_give_zero_xi() {
        let sys = noiseless_system(ForceModel::Linearized);
        let w0 = sys.trap.waist();
        let amps: Vec<f64> = (1..=6).map(|k| k as f64 * 0.05 * w0).collect();
        let trajs = run_amplitudes(&sys, &amps);
        let fit = duffing_backbone(&trajs).unwrap();
        // |xi| well below the softening scale probed above
        assert!(fit.xi.abs() < 0.02 * 0.3e12, "xi = {:.3e}", fit.xi);
    }

    #[test]
    fn single_amplitude_rejected() {
        let sys = noiseless_system(ForceModel::Linearized);
        let trajs = run_amplitudes(&sys, &[0.1 * sys.trap.waist()]);
        assert!(duffing_backbone(&trajs).is_err());
    }
}
