//! Welch-averaged power spectral density and the damped-oscillator
//! (Lorentzian) calibration fit.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::analysis::levmar::{self, LeastSquaresProblem, LevMarOptions};
use crate::error::{Error, Result};

/// One-sided Welch periodogram: Hann window, 50% overlap, segment means
/// removed. Returns (frequency in Hz, PSD in x²/Hz) excluding the DC bin.
pub fn welch_psd(samples: &[f64], sample_rate: f64, segment_len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = segment_len.min(samples.len()).next_power_of_two().min(samples.len());
    let n = if n > samples.len() { n / 2 } else { n };
    let hop = (n / 2).max(1);
    let window: Vec<f64> = (0..n)
        .map(|i| {
            0.5 * (1.0
                - (2.0 * std::f64::consts::PI * i as f64 / (n as f64 - 1.0)).cos())
        })
        .collect();
    let w2: f64 = window.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let n_bins = n / 2 + 1;
    let mut psd = vec![0.0f64; n_bins];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::default(); n];
    let mut start = 0usize;
    while start + n <= samples.len() {
        let seg = &samples[start..start + n];
        let mean = seg.iter().sum::<f64>() / n as f64;
        for (i, (&s, &w)) in seg.iter().zip(&window).enumerate() {
            buf[i] = Complex64::new((s - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, p) in psd.iter_mut().enumerate() {
            let mag2 = buf[k].norm_sqr();
            // one-sided: double everything except DC and Nyquist
            let factor = if k == 0 || (n % 2 == 0 && k == n / 2) {
                1.0
            } else {
                2.0
            };
            *p += factor * mag2 / (sample_rate * w2);
        }
        segments += 1;
        start += hop;
    }
    if segments > 0 {
        for p in &mut psd {
            *p /= segments as f64;
        }
    }
    let freq: Vec<f64> = (1..n_bins).map(|k| k as f64 * sample_rate / n as f64).collect();
    (freq, psd[1..].to_vec())
}

/// Damped-oscillator spectrum fit
/// S(ω) = A / ((ω² - ω0²)² + Γ²ω²) + B.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumFit {
    /// Resonance frequency, rad/s.
    pub omega0: f64,
    /// Damping rate, 1/s.
    pub gamma: f64,
    pub amplitude: f64,
    pub background: f64,
    /// Covariance of (ln ω0, ln Γ, ln A, ln B) from the fit.
    pub covariance: Vec<f64>,
    pub converged: bool,
}

struct LorentzianProblem<'a> {
    omega: &'a [f64],
    psd: &'a [f64],
}

fn lorentzian(omega: f64, w0: f64, g: f64, a: f64, b: f64) -> f64 {
    let d = omega * omega - w0 * w0;
    a / (d * d + g * g * omega * omega) + b
}

impl LeastSquaresProblem for LorentzianProblem<'_> {
    fn residual_count(&self) -> usize {
        self.omega.len()
    }
    fn parameter_count(&self) -> usize {
        4
    }
    fn residuals(&self, p: &[f64], r: &mut [f64]) {
        let (w0, g, a, b) = (p[0].exp(), p[1].exp(), p[2].exp(), p[3].exp());
        for (i, (&w, &y)) in self.omega.iter().zip(self.psd).enumerate() {
            // relative residuals: PSD estimate noise scales with its value
            r[i] = (lorentzian(w, w0, g, a, b) - y) / y;
        }
    }
    fn jacobian(&self, p: &[f64], j: &mut [f64]) {
        let (w0, g, a, b) = (p[0].exp(), p[1].exp(), p[2].exp(), p[3].exp());
        for (i, (&w, &y)) in self.omega.iter().zip(self.psd).enumerate() {
            let d = w * w - w0 * w0;
            let den = d * d + g * g * w * w;
            let row = &mut j[i * 4..(i + 1) * 4];
            // chain rule through the log parameters (d/dlnX = X d/dX)
            row[0] = w0 * (4.0 * a * w0 * d / (den * den)) / y;
            row[1] = g * (-2.0 * a * g * w * w / (den * den)) / y;
            row[2] = a / den / y;
            row[3] = b / y;
        }
    }
}

/// Welch-estimate the PSD of a position trace and fit the damped-oscillator
/// line shape around its dominant peak.
pub fn psd_lorentzian_calibration(samples: &[f64], sample_rate: f64) -> Result<SpectrumFit> {
    if samples.len() < 4096 {
        return Err(Error::InsufficientData {
            what: "PSD calibration",
            message: format!("trace too short ({} samples)", samples.len()),
        });
    }
    let segment = (samples.len() / 16)
        .next_power_of_two()
        .clamp(1024, 16384);
    let (freq, psd) = welch_psd(samples, sample_rate, segment);
    let duration = samples.len() as f64 / sample_rate;
    fit_lorentzian(&freq, &psd, Some(duration))
}

/// Fit the damped-oscillator line shape to an already-estimated PSD. With a
/// known trace duration, requires at least 100 oscillation periods.
pub fn fit_lorentzian(freq: &[f64], psd: &[f64], duration: Option<f64>) -> Result<SpectrumFit> {
    // peak must stand clear of the broadband background
    let mut sorted = psd.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let skip = 4.min(psd.len());
    let (peak_idx, &peak_val) = psd[skip..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i + skip, v))
        .ok_or(Error::NoSpectralPeak)?;
    if !(peak_val > 10.0 * median) || median <= 0.0 {
        return Err(Error::NoSpectralPeak);
    }
    let f_peak = freq[peak_idx];
    if let Some(duration) = duration {
        if f_peak * duration < 100.0 {
            return Err(Error::InsufficientData {
                what: "PSD calibration",
                message: "trace shorter than 100 oscillation periods".into(),
            });
        }
    }

    // half-maximum width estimate seeds Γ
    let half = peak_val / 2.0;
    let mut lo = peak_idx;
    while lo > 0 && psd[lo] > half {
        lo -= 1;
    }
    let mut hi = peak_idx;
    while hi + 1 < psd.len() && psd[hi] > half {
        hi += 1;
    }
    let fwhm_hz = (freq[hi] - freq[lo]).max(freq[1] - freq[0]);
    let w_peak = 2.0 * std::f64::consts::PI * f_peak;
    let gamma0 = 2.0 * std::f64::consts::PI * fwhm_hz;

    // fit around the peak only
    let band: Vec<usize> = (0..freq.len())
        .filter(|&i| freq[i] >= 0.5 * f_peak && freq[i] <= 1.6 * f_peak)
        .collect();
    let omega: Vec<f64> = band.iter().map(|&i| 2.0 * std::f64::consts::PI * freq[i]).collect();
    let values: Vec<f64> = band.iter().map(|&i| psd[i].max(1e-300)).collect();

    let a0 = peak_val * gamma0 * gamma0 * w_peak * w_peak;
    let b0 = median.max(peak_val * 1e-9);
    let problem = LorentzianProblem {
        omega: &omega,
        psd: &values,
    };
    let p0 = [w_peak.ln(), gamma0.ln(), a0.ln(), b0.ln()];
    let out = levmar::solve(&problem, &p0, &LevMarOptions::default());
    let fit = SpectrumFit {
        omega0: out.params[0].exp(),
        gamma: out.params[1].exp(),
        amplitude: out.params[2].exp(),
        background: out.params[3].exp(),
        covariance: out
            .jtj_inverse
            .map(|m| {
                let s2 = out.residual_rms * out.residual_rms;
                m.iter().map(|v| v * s2).collect()
            })
            .unwrap_or_default(),
        converged: out.converged,
    };
    if !fit.omega0.is_finite() || !fit.gamma.is_finite() {
        return Err(Error::FitDidNotConverge {
            what: "Lorentzian",
            iterations: out.iterations,
            residual: out.residual_rms,
        });
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn welch_peak_at_tone_frequency() {
        let fs = 10_000.0;
        let f0 = 1000.0;
        let x: Vec<f64> = (0..65536)
            .map(|i| (2.0 * std::f64::consts::PI * f0 * i as f64 / fs).sin())
            .collect();
        let (freq, psd) = welch_psd(&x, fs, 4096);
        let (imax, _) = psd
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert!((freq[imax] - f0).abs() < fs / 4096.0 * 1.5);
        // Parseval: integral of one-sided PSD ~ signal variance (0.5)
        let df = freq[1] - freq[0];
        let total: f64 = psd.iter().sum::<f64>() * df;
        assert!((total - 0.5).abs() < 0.05, "total = {total}");
    }

    #[test]
    fn white_noise_has_no_peak() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..32768).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        match psd_lorentzian_calibration(&x, 1e6) {
            Err(Error::NoSpectralPeak) => {}
            other => panic!("expected NoSpectralPeak, got {other:?}"),
        }
    }

    #[test]
    fn lorentzian_fit_recovers_synthetic_line() {
        // synthesize a PSD directly from the model and refit it
        let w0 = 2.0 * std::f64::consts::PI * 77e3;
        let g = 3.0e4;
        let a = 1e-2;
        let b = 1e-22;
        let freq: Vec<f64> = (0..2000).map(|i| 40e3 + i as f64 * 40.0).collect();
        let omega: Vec<f64> = freq.iter().map(|f| 2.0 * std::f64::consts::PI * f).collect();
        let psd: Vec<f64> = omega.iter().map(|&w| lorentzian(w, w0, g, a, b)).collect();
        let problem = LorentzianProblem {
            omega: &omega,
            psd: &psd,
        };
        let p0 = [
            (w0 * 1.03).ln(),
            (g * 2.0).ln(),
            (a * 10.0).ln(),
            (b * 0.2).ln(),
        ];
        let out = levmar::solve(&problem, &p0, &LevMarOptions::default());
        assert!(out.converged);
        assert!((out.params[0].exp() - w0).abs() / w0 < 1e-6);
        assert!((out.params[1].exp() - g).abs() / g < 1e-4);
    }
}
