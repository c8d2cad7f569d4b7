//! Exponential relaxation fit of a variance time series.

use serde::Serialize;

use crate::analysis::levmar::{self, LeastSquaresProblem, LevMarOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RelaxationFit {
    /// Time constant of σ²(t) = σ²_∞ + (σ²_0 - σ²_∞)·exp(-t/τ), s.
    pub tau: f64,
    pub var0: f64,
    pub var_inf: f64,
    pub residual_rms: f64,
    pub converged: bool,
}

struct RelaxProblem<'a> {
    t: &'a [f64],
    var: &'a [f64],
    scale: f64,
}

impl LeastSquaresProblem for RelaxProblem<'_> {
    fn residual_count(&self) -> usize {
        self.t.len()
    }
    fn parameter_count(&self) -> usize {
        3
    }
    fn residuals(&self, p: &[f64], r: &mut [f64]) {
        let (tau, v0, vinf) = (p[0].exp(), p[1], p[2]);
        for (i, (&t, &y)) in self.t.iter().zip(self.var).enumerate() {
            r[i] = (vinf + (v0 - vinf) * (-t / tau).exp() - y) / self.scale;
        }
    }
    fn jacobian(&self, p: &[f64], j: &mut [f64]) {
        let (tau, v0, vinf) = (p[0].exp(), p[1], p[2]);
        for (i, &t) in self.t.iter().enumerate() {
            let e = (-t / tau).exp();
            let row = &mut j[i * 3..(i + 1) * 3];
            row[0] = (v0 - vinf) * e * (t / tau) / self.scale; // d/d(ln tau)
            row[1] = e / self.scale;
            row[2] = (1.0 - e) / self.scale;
        }
    }
}

/// Fit the exponential decay of an ensemble variance series. The series must
/// span at least ~3 fitted time constants and actually decay; a flat series
/// is rejected as unidentifiable.
pub fn relaxation_time(t: &[f64], var: &[f64]) -> Result<RelaxationFit> {
    if t.len() != var.len() || t.len() < 8 {
        return Err(Error::InsufficientData {
            what: "relaxation fit",
            message: format!("need >= 8 points, got {}", t.len()),
        });
    }
    let vmax = var.iter().cloned().fold(f64::MIN, f64::max);
    let vmin = var.iter().cloned().fold(f64::MAX, f64::min);
    let mean = var.iter().sum::<f64>() / var.len() as f64;
    if !(vmax > vmin) || (vmax - vmin) < 0.05 * mean {
        return Err(Error::InsufficientData {
            what: "relaxation fit",
            message: "variance series is flat; time constant unidentifiable".into(),
        });
    }
    let span = t[t.len() - 1] - t[0];
    let problem = RelaxProblem {
        t,
        var,
        scale: vmax,
    };
    let p0 = [(span / 3.0).ln(), var[0], var[var.len() - 1]];
    let out = levmar::solve(&problem, &p0, &LevMarOptions::default());
    let fit = RelaxationFit {
        tau: out.params[0].exp(),
        var0: out.params[1],
        var_inf: out.params[2],
        residual_rms: out.residual_rms,
        converged: out.converged,
    };
    if !fit.converged {
        return Err(Error::FitDidNotConverge {
            what: "relaxation",
            iterations: out.iterations,
            residual: out.residual_rms,
        });
    }
    if span < 2.5 * fit.tau {
        return Err(Error::InsufficientData {
            what: "relaxation fit",
            message: format!(
                "series spans {:.2} fitted time constants (need >= 2.5)",
                span / fit.tau
            ),
        });
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_tau() {
        let tau = 20e-3;
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.5e-3).collect();
        let var: Vec<f64> = t
            .iter()
            .map(|&t| 1e-14 + (9e-13 - 1e-14) * (-t / tau).exp())
            .collect();
        let fit = relaxation_time(&t, &var).unwrap();
        assert!((fit.tau - tau).abs() / tau < 0.02, "tau = {}", fit.tau);
        assert!((fit.var0 - 9e-13).abs() / 9e-13 < 0.02);
    }

    #[test]
    fn flat_series_rejected() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let var = vec![3.0; 100];
        match relaxation_time(&t, &var) {
            Err(Error::InsufficientData { .. }) => {}
            other => panic!("expected InsufficientData, got {other:?}"),
        }
    }

    #[test]
    fn short_span_rejected() {
        let tau = 1.0;
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect(); // 1 tau
        let var: Vec<f64> = t.iter().map(|&t| 1.0 + 9.0 * (-t / tau).exp()).collect();
        assert!(relaxation_time(&t, &var).is_err());
    }
}
