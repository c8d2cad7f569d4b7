//! Square-wave control of the trap stiffness.
//!
//! A pulse holds the control at `s_low` for `tau_low`, then back at 1 for
//! `tau_high`; a sequence is a train of `n_pulses` pulses followed by a
//! recovery gap before the next sequence starts. The control value S(t)
//! multiplies the optical force/potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PulseProtocol {
    /// Low control level, in (0, 1).
    pub s_low: f64,
    /// Duration of the high window, s.
    pub tau_high: f64,
    /// Duration of the low window, s.
    pub tau_low: f64,
    /// Pulses per sequence.
    pub n_pulses: u32,
    /// Number of sequences.
    pub n_sequences: u32,
    /// Gap between the end of a train and the start of the next sequence, s.
    pub inter_sequence_delay: f64,
}

/// Quarter-period pulse timing for a trap of frequency `omega_high` (rad/s):
/// tau_high = π/(2ω), tau_low = π/(2ω√S).
pub fn protocol_timing(omega_high: f64, s_low: f64) -> (f64, f64) {
    let tau_high = std::f64::consts::PI / (2.0 * omega_high);
    let tau_low = tau_high / s_low.sqrt();
    (tau_high, tau_low)
}

impl PulseProtocol {
    pub fn new(
        s_low: f64,
        tau_high: f64,
        tau_low: f64,
        n_pulses: u32,
        n_sequences: u32,
        inter_sequence_delay: f64,
    ) -> Result<Self> {
        if !(s_low > 0.0 && s_low < 1.0) {
            return Err(Error::invalid_param("protocol.s_low", "must be in (0, 1)"));
        }
        if !(tau_high > 0.0) {
            return Err(Error::invalid_param("protocol.tau_high", "must be > 0"));
        }
        if !(tau_low > 0.0) {
            return Err(Error::invalid_param("protocol.tau_low", "must be > 0"));
        }
        if !(inter_sequence_delay >= 0.0) {
            return Err(Error::invalid_param(
                "protocol.inter_sequence_delay",
                "must be >= 0",
            ));
        }
        Ok(PulseProtocol {
            s_low,
            tau_high,
            tau_low,
            n_pulses,
            n_sequences,
            inter_sequence_delay,
        })
    }

    /// Quarter-period timing for the given trap frequency.
    pub fn with_quarter_period_timing(
        omega_high: f64,
        s_low: f64,
        n_pulses: u32,
    ) -> Result<Self> {
        let (tau_high, tau_low) = protocol_timing(omega_high, s_low);
        PulseProtocol::new(s_low, tau_high, tau_low, n_pulses, 1, 0.0)
    }

    pub fn pulse_period(&self) -> f64 {
        self.tau_low + self.tau_high
    }

    pub fn train_duration(&self) -> f64 {
        self.n_pulses as f64 * self.pulse_period()
    }

    pub fn sequence_period(&self) -> f64 {
        self.train_duration() + self.inter_sequence_delay
    }

    /// Control value S(t). Within a train, t' = t mod (tau_low + tau_high):
    /// S = 1 at t' = 0 and for t' in [tau_low, tau_low + tau_high], S = s_low
    /// for t' in (0, tau_low). After the train ends the control stays at 1
    /// until the next sequence starts.
    pub fn control(&self, time: f64) -> f64 {
        if time < 0.0 || self.n_pulses == 0 || self.n_sequences == 0 {
            return 1.0;
        }
        let seq_period = self.sequence_period();
        let seq_index = (time / seq_period).floor();
        if seq_index >= self.n_sequences as f64 {
            return 1.0;
        }
        let t_seq = time - seq_index * seq_period;
        if t_seq >= self.train_duration() {
            return 1.0;
        }
        let t_prime = t_seq % self.pulse_period();
        if t_prime > 0.0 && t_prime < self.tau_low {
            self.s_low
        } else {
            1.0
        }
    }

    /// Piecewise-constant segments of S(t) covering [0, t_end], with segment
    /// boundaries exactly at the control discontinuities. Integrators step
    /// within segments so window edges are never rounded to a step boundary.
    pub fn segments(&self, t_end: f64) -> Vec<ControlSegment> {
        let mut segs = Vec::new();
        let push = |start: f64, end: f64, s: f64, segs: &mut Vec<ControlSegment>| {
            let end = end.min(t_end);
            if end > start {
                segs.push(ControlSegment { start, end, s });
            }
        };
        if self.n_pulses == 0 || self.n_sequences == 0 {
            push(0.0, t_end, 1.0, &mut segs);
            return segs;
        }
        let seq_period = self.sequence_period();
        let pulse_period = self.pulse_period();
        'outer: for seq in 0..self.n_sequences as u64 {
            let seq_start = seq as f64 * seq_period;
            if seq_start >= t_end {
                break;
            }
            for k in 0..self.n_pulses as u64 {
                let t0 = seq_start + k as f64 * pulse_period;
                if t0 >= t_end {
                    break 'outer;
                }
                push(t0, t0 + self.tau_low, self.s_low, &mut segs);
                push(t0 + self.tau_low, t0 + pulse_period, 1.0, &mut segs);
            }
            let train_end = seq_start + self.train_duration();
            let next_start = if seq + 1 < self.n_sequences as u64 {
                seq_start + seq_period
            } else {
                t_end
            };
            push(train_end, next_start, 1.0, &mut segs);
        }
        if let Some(last) = segs.last() {
            if last.end < t_end {
                push(last.end, t_end, 1.0, &mut segs);
            }
        }
        segs
    }
}

/// One constant-control interval [start, end) with value `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSegment {
    pub start: f64,
    pub end: f64,
    pub s: f64,
}
