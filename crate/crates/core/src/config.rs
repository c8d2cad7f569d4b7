//! On-disk run configuration: a nested key/value (TOML) file with fixed SI
//! units per key. Unknown keys are errors; every applied default is recorded
//! so run metadata can echo the fully resolved configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::Bandwidth;
use crate::classical::{ForceModel, IntegrationScheme, SimConfig};
use crate::error::{Error, Result};
use crate::params::{
    DecoherenceSpec, GasEnvironment, ParticleSpec, TrapSpec, DEFAULT_GAS_MOLECULAR_MASS,
};
use crate::protocol::{protocol_timing, PulseProtocol};
use crate::quantum::InitialState;
use crate::trap::InvertedGaussianTrap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Classical,
    Quantum,
    Calibrate,
}

// ---------------------------------------------------------------------------
// raw (serde) layer
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: RunKind,
    master_seed: u64,
    output_dir: Option<String>,
    particle: RawParticle,
    gas: Option<RawGas>,
    trap: RawTrap,
    protocol: Option<RawProtocol>,
    sim: Option<RawSim>,
    analysis: Option<RawAnalysis>,
    quantum: Option<RawQuantum>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParticle {
    radius_m: f64,
    density_kg_m3: f64,
    refractive_index: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGas {
    pressure_pa: f64,
    temperature_k: f64,
    molecular_mass_kg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrap {
    // effective (calibrated) form
    frequency_hz: Option<f64>,
    duffing_xi_per_m2: Option<f64>,
    depth_over_hbar_omega: Option<f64>,
    // optical form
    wavelength_m: Option<f64>,
    waist_m: Option<f64>,
    medium_index: Option<f64>,
    power_high_w: Option<f64>,
    power_low_w: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    s_low: Option<f64>,
    n_pulses: u32,
    tau_high_s: Option<f64>,
    tau_low_s: Option<f64>,
    n_sequences: Option<u32>,
    inter_sequence_delay_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt_s: Option<f64>,
    duration_s: Option<f64>,
    n_trajectories: Option<usize>,
    snapshot_pulses: Option<Vec<u32>>,
    snapshot_times_s: Option<Vec<f64>>,
    escape_bound_m: Option<f64>,
    record_stride: Option<usize>,
    scheme: Option<IntegrationScheme>,
    force_model: Option<ForceModel>,
    variance_window_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    grid_points: Option<usize>,
    /// Kernel bandwidth in metres; absent = per-axis rule of thumb, 0 = raw
    /// histogram.
    bandwidth_m: Option<f64>,
    /// Snapshot to run the bimodality analysis on; default last.
    snapshot_index: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantum {
    n_points: Option<usize>,
    extent_units: Option<f64>,
    dt_fraction_of_period: Option<f64>,
    duration_periods: f64,
    duration_in_radians: Option<bool>,
    snapshot_every_periods: Option<f64>,
    decoherence: RawDecoherence,
    initial_states: Vec<RawInitialState>,
    write_all_wigner: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecoherence {
    gamma_over_omega: Option<f64>,
    lambda_hz_per_m2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawInitialState {
    Thermal { nbar: f64 },
    Fock { n: usize },
    BlurredFock { n_center: usize, sigma_n: Option<f64> },
    Gaussian { width_m: f64 },
}

// ---------------------------------------------------------------------------
// validated layer
// ---------------------------------------------------------------------------

/// Trap resolved to an inverted-Gaussian well at the high power level.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedTrap {
    pub trap: InvertedGaussianTrap,
    /// Harmonic frequency at S = 1, rad/s.
    pub omega_high: f64,
    /// Optical parameters, kept when the trap was specified optically.
    pub optics: Option<TrapSpec>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSettings {
    pub grid_points: usize,
    /// None = per-axis rule of thumb.
    pub bandwidth_m: Option<f64>,
    pub snapshot_index: Option<usize>,
}

impl AnalysisSettings {
    pub fn bandwidth(&self) -> Bandwidth {
        match self.bandwidth_m {
            Some(h) => Bandwidth::Fixed(h),
            None => Bandwidth::Silverman,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantumSettings {
    pub n_points: usize,
    /// Grid half-extent in internal length units; None = automatic.
    pub extent_units: Option<f64>,
    pub dt_fraction_of_period: f64,
    pub duration_periods: f64,
    /// When set, `duration_periods` is read as ωt in radians.
    pub duration_in_radians: bool,
    pub snapshot_every_periods: f64,
    pub decoherence: DecoherenceSpec,
    pub initial_states: Vec<(String, InitialState)>,
    pub write_all_wigner: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub kind: RunKind,
    pub master_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub particle: ParticleSpec,
    pub gas: Option<GasEnvironment>,
    pub trap: ResolvedTrap,
    /// SI (seconds) timing.
    pub protocol: Option<PulseProtocol>,
    pub sim: Option<SimConfig>,
    pub force_model: ForceModel,
    pub analysis: AnalysisSettings,
    pub quantum: Option<QuantumSettings>,
    pub variance_window_s: Option<f64>,
    /// Every default that was filled in during validation, `key = value`.
    pub applied_defaults: Vec<String>,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::ConfigParse(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    validate(raw)
}

fn require<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(key, "required key is missing"))
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let mut defaults = Vec::new();

    let particle = ParticleSpec::new(
        raw.particle.radius_m,
        raw.particle.density_kg_m3,
        raw.particle.refractive_index,
    )?;

    let gas = match raw.gas {
        Some(g) => {
            let mass = g.molecular_mass_kg.unwrap_or_else(|| {
                defaults.push(format!(
                    "gas.molecular_mass_kg = {DEFAULT_GAS_MOLECULAR_MASS:e} (air)"
                ));
                DEFAULT_GAS_MOLECULAR_MASS
            });
            Some(GasEnvironment::new(g.pressure_pa, g.temperature_k, mass)?)
        }
        None => None,
    };
    if matches!(raw.kind, RunKind::Classical | RunKind::Calibrate) && gas.is_none() {
        return Err(Error::config("gas", "section required for this run kind"));
    }

    let trap = resolve_trap(&raw.trap, &particle, raw.kind)?;

    let protocol = match raw.protocol {
        Some(p) => Some(resolve_protocol(&p, &trap, &mut defaults)?),
        None => None,
    };
    if raw.kind == RunKind::Classical && protocol.is_none() {
        return Err(Error::config("protocol", "section required for classical runs"));
    }

    let sim = match raw.kind {
        RunKind::Classical | RunKind::Calibrate => Some(resolve_sim(
            raw.sim.as_ref(),
            raw.kind,
            &trap,
            protocol.as_ref(),
            raw.master_seed,
            &mut defaults,
        )?),
        RunKind::Quantum => None,
    };

    let analysis = {
        let a = raw.analysis.as_ref();
        let grid_points = a.and_then(|a| a.grid_points).unwrap_or_else(|| {
            defaults.push("analysis.grid_points = 121".into());
            121
        });
        if grid_points < 16 {
            return Err(Error::config("analysis.grid_points", "must be >= 16"));
        }
        if let Some(h) = a.and_then(|a| a.bandwidth_m) {
            if h < 0.0 {
                return Err(Error::config("analysis.bandwidth_m", "must be >= 0"));
            }
        }
        AnalysisSettings {
            grid_points,
            bandwidth_m: a.and_then(|a| a.bandwidth_m),
            snapshot_index: a.and_then(|a| a.snapshot_index),
        }
    };

    let quantum = match (raw.kind, raw.quantum) {
        (RunKind::Quantum, None) => {
            return Err(Error::config("quantum", "section required for quantum runs"))
        }
        (RunKind::Quantum, Some(q)) => Some(resolve_quantum(q, &mut defaults)?),
        (_, Some(_)) => {
            return Err(Error::config(
                "quantum",
                "section only valid for kind = \"quantum\"",
            ))
        }
        (_, None) => None,
    };
    if raw.kind == RunKind::Quantum && protocol.is_none() {
        return Err(Error::config("protocol", "section required for quantum runs"));
    }

    Ok(RunConfig {
        kind: raw.kind,
        master_seed: raw.master_seed,
        output_dir: raw.output_dir.map(PathBuf::from),
        particle,
        gas,
        trap,
        protocol,
        sim,
        force_model: raw
            .sim
            .as_ref()
            .and_then(|s| s.force_model)
            .unwrap_or_default(),
        analysis,
        quantum,
        variance_window_s: raw.sim.as_ref().and_then(|s| s.variance_window_s),
        applied_defaults: defaults,
    })
}

fn resolve_trap(raw: &RawTrap, particle: &ParticleSpec, kind: RunKind) -> Result<ResolvedTrap> {
    let effective = raw.frequency_hz.is_some();
    let optical = raw.waist_m.is_some() || raw.power_high_w.is_some();
    if effective && optical {
        return Err(Error::config(
            "trap",
            "give either frequency_hz (effective form) or waist_m/power_high_w (optical form), not both",
        ));
    }
    if effective {
        let f = require(raw.frequency_hz, "trap.frequency_hz")?;
        if !(f > 0.0) {
            return Err(Error::config("trap.frequency_hz", "must be > 0"));
        }
        let omega = 2.0 * std::f64::consts::PI * f;
        let trap = match (raw.duffing_xi_per_m2, raw.depth_over_hbar_omega) {
            (Some(xi), None) => {
                InvertedGaussianTrap::from_frequency_and_xi(omega, xi, particle.mass())?
            }
            (None, Some(ratio)) => InvertedGaussianTrap::from_frequency_and_depth_ratio(
                omega,
                ratio,
                particle.mass(),
            )?,
            _ => {
                return Err(Error::config(
                    "trap",
                    "effective form needs exactly one of duffing_xi_per_m2 or depth_over_hbar_omega",
                ))
            }
        };
        Ok(ResolvedTrap {
            trap,
            omega_high: omega,
            optics: None,
        })
    } else {
        let spec = TrapSpec::new(
            // wavelength only matters for recoil estimates; default telecom
            raw.wavelength_m.unwrap_or(1550e-9),
            require(raw.waist_m, "trap.waist_m")?,
            raw.medium_index.unwrap_or(1.0),
            require(raw.power_high_w, "trap.power_high_w")?,
            raw.power_low_w
                .or(raw.power_high_w)
                .expect("power_high_w checked above"),
        )?;
        let trap = InvertedGaussianTrap::from_optics(&spec, particle, spec.power_high)?;
        let omega = trap.frequency(particle.mass());
        if kind == RunKind::Quantum {
            return Err(Error::config(
                "trap",
                "quantum runs use the effective form (frequency_hz + depth_over_hbar_omega)",
            ));
        }
        Ok(ResolvedTrap {
            trap,
            omega_high: omega,
            optics: Some(spec),
        })
    }
}

fn resolve_protocol(
    raw: &RawProtocol,
    trap: &ResolvedTrap,
    defaults: &mut Vec<String>,
) -> Result<PulseProtocol> {
    let s_low = match raw.s_low {
        Some(s) => s,
        None => match &trap.optics {
            Some(spec) => {
                let s = spec.modulation_depth();
                defaults.push(format!("protocol.s_low = {s} (power_low/power_high)"));
                s
            }
            None => return Err(Error::config("protocol.s_low", "required key is missing")),
        },
    };
    if !(s_low > 0.0 && s_low < 1.0) {
        return Err(Error::config("protocol.s_low", "must be in (0, 1)"));
    }
    let (tau_high_default, tau_low_default) = protocol_timing(trap.omega_high, s_low);
    let tau_high = raw.tau_high_s.unwrap_or_else(|| {
        defaults.push(format!("protocol.tau_high_s = {tau_high_default:e} (pi/(2 omega))"));
        tau_high_default
    });
    let tau_low = raw.tau_low_s.unwrap_or_else(|| {
        defaults.push(format!(
            "protocol.tau_low_s = {tau_low_default:e} (pi/(2 omega sqrt(s_low)))"
        ));
        tau_low_default
    });
    let n_sequences = raw.n_sequences.unwrap_or(1);
    let delay = raw.inter_sequence_delay_s.unwrap_or(0.0);
    PulseProtocol::new(s_low, tau_high, tau_low, raw.n_pulses, n_sequences, delay)
}

fn resolve_sim(
    raw: Option<&RawSim>,
    kind: RunKind,
    trap: &ResolvedTrap,
    protocol: Option<&PulseProtocol>,
    master_seed: u64,
    defaults: &mut Vec<String>,
) -> Result<SimConfig> {
    let omega = trap.omega_high;
    let period = 2.0 * std::f64::consts::PI / omega;
    let tau_low = protocol.map(|p| p.tau_low).unwrap_or(period / 4.0);

    let dt = match raw.and_then(|s| s.dt_s) {
        Some(dt) => dt,
        None => {
            let dt = SimConfig::default_dt(omega, tau_low);
            defaults.push(format!("sim.dt_s = {dt:e} (min(T/1000, tau_low/50))"));
            dt
        }
    };

    let duration = match raw.and_then(|s| s.duration_s) {
        Some(d) => d,
        None => match kind {
            RunKind::Calibrate => {
                defaults.push("sim.duration_s = 0.1".into());
                0.1
            }
            _ => {
                let d = protocol
                    .map(|p| p.train_duration())
                    .filter(|d| *d > 0.0)
                    .ok_or_else(|| Error::config("sim.duration_s", "required (no pulse train to infer it from)"))?;
                defaults.push(format!("sim.duration_s = {d:e} (end of pulse train)"));
                d
            }
        },
    };

    let n_trajectories = match raw.and_then(|s| s.n_trajectories) {
        Some(n) => n,
        None => {
            let n = if kind == RunKind::Calibrate { 8 } else { 689 };
            defaults.push(format!("sim.n_trajectories = {n}"));
            n
        }
    };

    // snapshot schedule: explicit times plus pulse-boundary marks
    let mut snapshot_times: Vec<f64> = raw
        .and_then(|s| s.snapshot_times_s.clone())
        .unwrap_or_default();
    if let Some(pulses) = raw.and_then(|s| s.snapshot_pulses.clone()) {
        let p = protocol.ok_or_else(|| {
            Error::config("sim.snapshot_pulses", "requires a protocol section")
        })?;
        for k in pulses {
            snapshot_times.push(k as f64 * p.pulse_period());
        }
    }
    if snapshot_times.is_empty() && kind == RunKind::Classical {
        let t = protocol.map(|p| p.train_duration()).unwrap_or(duration);
        defaults.push(format!("sim.snapshot_times_s = [{t:e}] (end of pulse train)"));
        snapshot_times.push(t);
    }
    snapshot_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    snapshot_times.dedup();

    let escape_bound = match raw.and_then(|s| s.escape_bound_m) {
        Some(b) => b,
        None => {
            let b = 3.0 * trap.trap.waist();
            defaults.push(format!("sim.escape_bound_m = {b:e} (3 waist)"));
            b
        }
    };

    let record_stride = raw.and_then(|s| s.record_stride).unwrap_or_else(|| {
        if kind == RunKind::Calibrate {
            defaults.push("sim.record_stride = 32".into());
            32
        } else {
            0
        }
    });

    let cfg = SimConfig {
        dt,
        duration,
        snapshot_times,
        n_trajectories,
        master_seed,
        escape_bound,
        record_stride,
        scheme: raw.and_then(|s| s.scheme).unwrap_or_default(),
    };
    cfg.validate(omega)?;
    Ok(cfg)
}

fn resolve_quantum(raw: RawQuantum, defaults: &mut Vec<String>) -> Result<QuantumSettings> {
    let n_points = raw.n_points.unwrap_or_else(|| {
        defaults.push("quantum.n_points = 512".into());
        512
    });
    if !n_points.is_power_of_two() || n_points < 128 {
        return Err(Error::config(
            "quantum.n_points",
            "must be a power of two >= 128",
        ));
    }
    let dt_fraction = raw.dt_fraction_of_period.unwrap_or_else(|| {
        defaults.push("quantum.dt_fraction_of_period = 0.0005 (T/2000)".into());
        1.0 / 2000.0
    });
    if !(dt_fraction > 0.0 && dt_fraction <= 1.0 / 500.0) {
        return Err(Error::config(
            "quantum.dt_fraction_of_period",
            "must be in (0, 1/500]",
        ));
    }
    if !(raw.duration_periods > 0.0) {
        return Err(Error::config("quantum.duration_periods", "must be > 0"));
    }
    let snapshot_every = raw.snapshot_every_periods.unwrap_or_else(|| {
        defaults.push("quantum.snapshot_every_periods = 0.25".into());
        0.25
    });
    if !(snapshot_every > 0.0) {
        return Err(Error::config("quantum.snapshot_every_periods", "must be > 0"));
    }

    let decoherence = match (raw.decoherence.gamma_over_omega, raw.decoherence.lambda_hz_per_m2) {
        (Some(r), None) => DecoherenceSpec::GammaOverOmega(r),
        (None, Some(l)) => DecoherenceSpec::LambdaRecoil(l),
        _ => {
            return Err(Error::config(
                "quantum.decoherence",
                "give exactly one of gamma_over_omega or lambda_hz_per_m2",
            ))
        }
    };
    decoherence.validate()?;

    if raw.initial_states.is_empty() {
        return Err(Error::config(
            "quantum.initial_states",
            "at least one initial state is required",
        ));
    }
    let mut initial_states = Vec::new();
    for (i, s) in raw.initial_states.iter().enumerate() {
        let (label, state) = match *s {
            RawInitialState::Thermal { nbar } => {
                ("thermal".to_string(), InitialState::Thermal { nbar })
            }
            RawInitialState::Fock { n } => (format!("fock{n}"), InitialState::Fock { n }),
            RawInitialState::BlurredFock { n_center, sigma_n } => {
                let sigma_n = sigma_n.unwrap_or_else(|| {
                    defaults.push(format!(
                        "quantum.initial_states[{i}].sigma_n = 5.0"
                    ));
                    5.0
                });
                (
                    format!("blurred_fock{n_center}"),
                    InitialState::BlurredFock { n_center, sigma_n },
                )
            }
            RawInitialState::Gaussian { width_m } => {
                if !(width_m > 0.0) {
                    return Err(Error::config(
                        "quantum.initial_states.width_m",
                        "must be > 0",
                    ));
                }
                // converted to internal units by the pipeline
                ("gaussian".to_string(), InitialState::Gaussian { width: width_m })
            }
        };
        let state_checked = state;
        state_checked.validate()?;
        let mut label = label;
        let mut suffix = 1;
        while initial_states.iter().any(|(l, _)| *l == label) {
            suffix += 1;
            label = format!("{label}_{suffix}");
        }
        initial_states.push((label, state_checked));
    }

    Ok(QuantumSettings {
        n_points,
        extent_units: raw.extent_units,
        dt_fraction_of_period: dt_fraction,
        duration_periods: raw.duration_periods,
        duration_in_radians: raw.duration_in_radians.unwrap_or(false),
        snapshot_every_periods: snapshot_every,
        decoherence,
        initial_states,
        write_all_wigner: raw.write_all_wigner.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASSICAL: &str = r#"
kind = "classical"
master_seed = 7

[particle]
radius_m = 230e-9
density_kg_m3 = 2200.0
refractive_index = 1.44

[gas]
pressure_pa = 1.0
temperature_k = 300.0

[trap]
frequency_hz = 77e3
duffing_xi_per_m2 = -1.0e11

[protocol]
s_low = 0.71
n_pulses = 55
tau_low_s = 3.48e-6

[sim]
n_trajectories = 32
"#;

    #[test]
    fn classical_config_loads_with_defaults() {
        let cfg = parse_config(CLASSICAL).unwrap();
        assert_eq!(cfg.kind, RunKind::Classical);
        let sim = cfg.sim.as_ref().unwrap();
        assert_eq!(sim.n_trajectories, 32);
        let protocol = cfg.protocol.as_ref().unwrap();
        assert!((protocol.tau_high - 3.2468e-6).abs() < 1e-9);
        assert_eq!(protocol.tau_low, 3.48e-6);
        // defaults were echoed
        assert!(cfg.applied_defaults.iter().any(|d| d.starts_with("sim.dt_s")));
        assert!(cfg
            .applied_defaults
            .iter()
            .any(|d| d.starts_with("sim.escape_bound_m")));
        // duration defaulted to the train end
        assert!((sim.duration - 55.0 * (3.48e-6 + protocol.tau_high)).abs() < 1e-12);
        // trap calibrated to 77 kHz and xi
        assert!((cfg.trap.omega_high - 2.0 * std::f64::consts::PI * 77e3).abs() < 1e-6);
        assert!((cfg.trap.trap.duffing_xi() + 1.0e11).abs() / 1.0e11 < 1e-12);
    }

    #[test]
    fn empty_config_lists_missing_sections() {
        let err = parse_config("").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kind") || msg.contains("missing"), "{msg}");
    }

    #[test]
    fn unknown_key_is_an_error() {
        let bad = CLASSICAL.replace("[sim]", "[sim]\nbogus_key = 3");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn s_low_range_error_names_key() {
        let bad = CLASSICAL.replace("s_low = 0.71", "s_low = 1.5");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("protocol.s_low"), "{err}");
    }

    #[test]
    fn quantum_config() {
        let text = r#"
kind = "quantum"
master_seed = 1

[particle]
radius_m = 4e-9
density_kg_m3 = 2200.0
refractive_index = 1.44

[trap]
frequency_hz = 80e3
depth_over_hbar_omega = 100.0

[protocol]
s_low = 0.71
n_pulses = 12

[quantum]
duration_periods = 3.0
decoherence = { gamma_over_omega = 1.0e-5 }

[[quantum.initial_states]]
kind = "thermal"
nbar = 4.52

[[quantum.initial_states]]
kind = "blurred_fock"
n_center = 20
"#;
        let cfg = parse_config(text).unwrap();
        let q = cfg.quantum.as_ref().unwrap();
        assert_eq!(q.n_points, 512);
        assert_eq!(q.initial_states.len(), 2);
        assert_eq!(q.initial_states[0].0, "thermal");
        assert!(matches!(
            q.initial_states[1].1,
            InitialState::BlurredFock { n_center: 20, sigma_n } if sigma_n == 5.0
        ));
        assert!(matches!(q.decoherence, DecoherenceSpec::GammaOverOmega(r) if r == 1.0e-5));
        // depth ratio 100 carried through the trap
        let u0_over = cfg.trap.trap.depth()
            / (crate::constants::HBAR * cfg.trap.omega_high);
        assert!((u0_over - 100.0).abs() < 1e-9);
    }

    #[test]
    fn optical_trap_form() {
        let text = r#"
kind = "calibrate"
master_seed = 3

[particle]
radius_m = 100e-9
density_kg_m3 = 2200.0
refractive_index = 1.44

[gas]
pressure_pa = 500.0
temperature_k = 300.0

[trap]
wavelength_m = 1550e-9
waist_m = 1.0e-6
medium_index = 1.0
power_high_w = 80e-3
power_low_w = 57e-3

[protocol]
n_pulses = 0
"#;
        let cfg = parse_config(text).unwrap();
        assert!(cfg.trap.optics.is_some());
        // s_low defaulted from the power ratio
        let p = cfg.protocol.as_ref().unwrap();
        assert!((p.s_low - 57.0 / 80.0).abs() < 1e-12);
        assert!(cfg
            .applied_defaults
            .iter()
            .any(|d| d.starts_with("protocol.s_low")));
    }
}
