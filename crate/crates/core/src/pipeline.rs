//! Run orchestration: dispatch a validated [`RunConfig`] to the matching
//! simulator, write artifact files, and emit a metadata sidecar.
//!
//! Every numeric artifact (CSV, JSON report, binary matrix) is reproducible
//! byte for byte for a fixed config and seed; wall-clock timing lives only in
//! `metadata.json`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    self, ashman_d, fit_double_gaussian, fit_lorentzian, phase_space_density, position_marginal,
    relaxation_time, welch_psd, Bandwidth,
};
use crate::classical::{
    run_ensemble, run_ensemble_recorded, variance_timeseries, EnsembleResult, LangevinSystem,
    SnapshotPoint, Trajectory,
};
use crate::config::{RunConfig, RunKind};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::output;
use crate::params::DecoherenceSpec;
use crate::physics::{gas_damping_rate, zero_point_fluctuation};
use crate::protocol::PulseProtocol;
use crate::quantum::{
    build_hamiltonian_terms, prepare_initial_state, propagate, wigner_transform, InitialState,
    OscillatorUnits, PropagationSettings, QuantumGrid,
};

pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    constants: PhysicalConstants,
    notes: Vec<String>,
    timing: Timing,
}

#[derive(Serialize)]
struct Timing {
    wall_seconds: f64,
}

/// Run the configured pipeline, writing artifacts into `out_dir`. With
/// `threads` set, all internal parallelism is capped to that worker count;
/// results are identical for any thread count.
pub fn run(config: &RunConfig, out_dir: &Path, threads: Option<usize>) -> Result<RunReport> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Other(format!("thread pool: {e}")))?;
            pool.install(|| run_inner(config, out_dir))
        }
        None => run_inner(config, out_dir),
    }
}

fn run_inner(config: &RunConfig, out_dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let (mut files, summary, notes) = match config.kind {
        RunKind::Classical => run_classical(config, out_dir)?,
        RunKind::Quantum => run_quantum(config, out_dir)?,
        RunKind::Calibrate => run_calibrate(config, out_dir)?,
    };
    let metadata = Metadata {
        tool: "levipulse",
        version: env!("CARGO_PKG_VERSION"),
        config,
        constants: PhysicalConstants::SI,
        notes,
        timing: Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    };
    let meta_path = out_dir.join("metadata.json");
    output::write_json(&meta_path, &metadata)?;
    files.push(meta_path);
    Ok(RunReport { files, summary })
}

fn langevin_system(config: &RunConfig) -> Result<LangevinSystem> {
    let gas = config
        .gas
        .as_ref()
        .ok_or_else(|| Error::config("gas", "section required"))?;
    Ok(LangevinSystem {
        mass: config.particle.mass(),
        damping: gas_damping_rate(&config.particle, gas),
        temperature: gas.temperature,
        trap: config.trap.trap,
        force_model: config.force_model,
    })
}

// ---------------------------------------------------------------------------
// classical
// ---------------------------------------------------------------------------

/// Bimodality analysis of one snapshot point cloud.
#[derive(Serialize)]
struct BimodalityReport {
    snapshot_index: usize,
    time_s: f64,
    n_points: usize,
    bandwidth_m: (f64, f64),
    fit: analysis::DoubleGaussianFit,
    ashman_d: f64,
}

fn analyze_snapshot(
    points: &[(f64, f64)],
    snapshot_index: usize,
    time_s: f64,
    config: &RunConfig,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<BimodalityReport> {
    let density = phase_space_density(points, None, config.analysis.bandwidth())?;
    let marginal = position_marginal(&density);
    let fit = fit_double_gaussian(&marginal.x, &marginal.density)?;
    let a_d = ashman_d(&fit);

    let density_path = out_dir.join(format!("density_{snapshot_index}.csv"));
    output::write_density_csv(&density_path, &density)?;
    files.push(density_path);
    let marginal_path = out_dir.join(format!("marginal_{snapshot_index}.csv"));
    output::write_marginal_csv(&marginal_path, &marginal)?;
    files.push(marginal_path);

    Ok(BimodalityReport {
        snapshot_index,
        time_s,
        n_points: points.len(),
        bandwidth_m: density.bandwidth,
        fit,
        ashman_d: a_d,
    })
}

fn snapshots_from_recorded(
    trajectories: &[Trajectory],
    snapshot_times: &[f64],
    omega: f64,
) -> EnsembleResult {
    let mut snapshots = vec![Vec::new(); snapshot_times.len()];
    for (idx, traj) in trajectories.iter().enumerate() {
        for (k, &ts) in snapshot_times.iter().enumerate() {
            // nearest recorded sample at or around the snapshot time
            let pos = traj.times.partition_point(|&t| t < ts);
            let candidate = if pos == 0 {
                0
            } else if pos >= traj.times.len() {
                traj.times.len() - 1
            } else if (traj.times[pos] - ts).abs() < (ts - traj.times[pos - 1]).abs() {
                pos
            } else {
                pos - 1
            };
            // escaped trajectories end early; drop snapshots past their end
            if traj.escaped && traj.times[traj.times.len() - 1] < ts {
                continue;
            }
            snapshots[k].push(SnapshotPoint {
                trajectory_index: idx as u32,
                x: traj.positions[candidate],
                p_scaled: traj.velocities[candidate] / omega,
            });
        }
    }
    EnsembleResult {
        snapshot_times: snapshot_times.to_vec(),
        snapshots,
        n_escaped: trajectories.iter().filter(|t| t.escaped).count(),
        n_trajectories: trajectories.len(),
        omega_ref: omega,
    }
}

fn run_classical(
    config: &RunConfig,
    out_dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value, Vec<String>)> {
    let sys = langevin_system(config)?;
    let protocol = config
        .protocol
        .as_ref()
        .ok_or_else(|| Error::config("protocol", "section required"))?;
    let sim = config
        .sim
        .as_ref()
        .ok_or_else(|| Error::config("sim", "section required"))?;

    let mut files = Vec::new();
    let mut notes = Vec::new();
    let mut relaxation_json = serde_json::Value::Null;

    let ensemble = if sim.record_stride == 0 {
        run_ensemble(protocol, sim, &sys)?
    } else {
        let trajs = run_ensemble_recorded(protocol, sim, &sys)?;
        let n_escaped = trajs.iter().filter(|t| t.escaped).count();
        if 2 * n_escaped > trajs.len() {
            return Err(Error::TooManyEscapes {
                escaped: n_escaped,
                total: trajs.len(),
            });
        }
        let window = config
            .variance_window_s
            .unwrap_or(sim.duration / 400.0);
        let series = variance_timeseries(&trajs, window);
        let series_path = out_dir.join("variance_series.csv");
        output::write_series_csv(&series_path, "t_s,std_x_m", &series)?;
        files.push(series_path);
        notes.push(format!("variance window {window:e} s"));

        // post-protocol relaxation fit when the run extends past the train
        let train_end = protocol.train_duration();
        let post: Vec<(f64, f64)> = series
            .iter()
            .filter(|(t, _)| *t > train_end)
            .map(|&(t, s)| (t - train_end, s * s))
            .collect();
        if post.len() >= 8 && sim.duration > train_end * 1.5 {
            match relaxation_time(
                &post.iter().map(|p| p.0).collect::<Vec<_>>(),
                &post.iter().map(|p| p.1).collect::<Vec<_>>(),
            ) {
                Ok(fit) => {
                    let expected = 1.0 / sys.damping;
                    relaxation_json = json!({
                        "tau_s": fit.tau,
                        "expected_1_over_gamma_s": expected,
                        "ratio": fit.tau / expected,
                        "var0_m2": fit.var0,
                        "var_inf_m2": fit.var_inf,
                    });
                    let path = out_dir.join("relaxation.json");
                    output::write_json(&path, &relaxation_json)?;
                    files.push(path);
                }
                Err(e) => notes.push(format!("relaxation fit skipped: {e}")),
            }
        }
        snapshots_from_recorded(&trajs, &sim.snapshot_times, sys.omega_high())
    };

    let snapshots_path = out_dir.join("snapshots.csv");
    output::write_snapshots_csv(&snapshots_path, &ensemble)?;
    files.push(snapshots_path);

    let snap_idx = config
        .analysis
        .snapshot_index
        .unwrap_or(ensemble.snapshots.len().saturating_sub(1));
    if snap_idx >= ensemble.snapshots.len() {
        return Err(Error::config(
            "analysis.snapshot_index",
            format!("only {} snapshots available", ensemble.snapshots.len()),
        ));
    }
    let points = ensemble.points(snap_idx);
    let report = analyze_snapshot(
        &points,
        snap_idx,
        ensemble.snapshot_times[snap_idx],
        config,
        out_dir,
        &mut files,
    )?;
    let report_path = out_dir.join("bimodality.json");
    output::write_json(&report_path, &report)?;
    files.push(report_path);

    let summary = json!({
        "kind": "classical",
        "n_trajectories": ensemble.n_trajectories,
        "n_escaped": ensemble.n_escaped,
        "ashman_d": report.ashman_d,
        "fit_converged": report.fit.converged,
        "snapshot_time_s": ensemble.snapshot_times[snap_idx],
        "relaxation": relaxation_json,
    });
    Ok((files, summary, notes))
}

// ---------------------------------------------------------------------------
// quantum
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct NegativityReport {
    label: String,
    initial_state: InitialState,
    omega_t_over_2pi: Vec<f64>,
    times_s: Vec<f64>,
    negativity_signed: Vec<f64>,
    negativity_magnitude: Vec<f64>,
    delta_n: Vec<f64>,
    purity: Vec<f64>,
}

/// Positions of the two highest local maxima of a marginal.
fn marginal_peaks(x: &[f64], w: &[f64]) -> Vec<f64> {
    let mut maxima: Vec<usize> = (1..w.len() - 1)
        .filter(|&i| w[i] >= w[i - 1] && w[i] > w[i + 1])
        .collect();
    maxima.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap());
    maxima.iter().take(2).map(|&i| x[i]).collect()
}

fn run_quantum(
    config: &RunConfig,
    out_dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value, Vec<String>)> {
    let q = config
        .quantum
        .as_ref()
        .ok_or_else(|| Error::config("quantum", "section required"))?;
    let protocol_si = config
        .protocol
        .as_ref()
        .ok_or_else(|| Error::config("protocol", "section required"))?;

    let mass = config.particle.mass();
    let omega = config.trap.omega_high;
    let units = OscillatorUnits { mass, omega };
    let period_int = 2.0 * std::f64::consts::PI;

    let mut notes = Vec::new();

    // internal-unit protocol: times scale by omega
    let protocol = PulseProtocol::new(
        protocol_si.s_low,
        protocol_si.tau_high * omega,
        protocol_si.tau_low * omega,
        protocol_si.n_pulses,
        protocol_si.n_sequences,
        protocol_si.inter_sequence_delay * omega,
    )?;

    let duration_int = if q.duration_in_radians {
        notes.push(format!(
            "duration read literally as omega*t = {} rad",
            q.duration_periods
        ));
        q.duration_periods
    } else {
        notes.push(format!(
            "duration {} oscillation periods (omega*t = {} rad)",
            q.duration_periods,
            q.duration_periods * period_int
        ));
        q.duration_periods * period_int
    };

    // convert Gaussian widths (config carries metres) to internal units
    let states: Vec<(String, InitialState)> = q
        .initial_states
        .iter()
        .map(|(label, s)| {
            let s = match *s {
                InitialState::Gaussian { width } => InitialState::Gaussian {
                    width: width / units.length(),
                },
                other => other,
            };
            (label.clone(), s)
        })
        .collect();

    let u0_int = config.trap.trap.depth() / units.energy();
    let w0_int = config.trap.trap.waist() / units.length();
    let max_std = states
        .iter()
        .map(|(_, s)| s.position_variance().sqrt())
        .fold(0.0f64, f64::max);
    let extent = q
        .extent_units
        .unwrap_or_else(|| (6.0 * max_std).max(1.2 * w0_int));
    let grid = QuantumGrid::new(q.n_points, extent)?;
    let p_max_expected = 1.5 * states
        .iter()
        .map(|(_, s)| s.momentum_std())
        .fold(0.0f64, f64::max);
    let terms = build_hamiltonian_terms(&grid, u0_int, w0_int, p_max_expected)?;

    let dt_int = q.dt_fraction_of_period * period_int;
    let zpf = zero_point_fluctuation(mass, omega);
    let lambda_si = match q.decoherence {
        DecoherenceSpec::LambdaRecoil(l) => l,
        spec => spec.lambda(zpf, omega),
    };
    let lambda_int = units.lambda_to_internal(lambda_si);
    notes.push(format!(
        "decoherence: lambda = {lambda_si:e} Hz/m^2, gamma/omega = {:e}",
        q.decoherence.gamma_over_omega(zpf, omega)
    ));

    let mut snapshot_times: Vec<f64> = Vec::new();
    let step = q.snapshot_every_periods * period_int;
    let mut t = 0.0;
    while t < duration_int - 1e-9 {
        snapshot_times.push(t);
        t += step;
    }
    snapshot_times.push(duration_int);

    let settings = PropagationSettings::new(dt_int, lambda_int);

    let mut files = Vec::new();
    let mut state_summaries = Vec::new();
    for (label, spec) in &states {
        let rho0 = prepare_initial_state(spec, &grid)?;
        let result = propagate(&rho0, &terms, Some(&protocol), duration_int, &snapshot_times, &settings)?;

        let mut times_int = Vec::new();
        let mut n_signed = Vec::new();
        let mut purity = Vec::new();
        for (k, (t, state)) in result.snapshots.iter().enumerate() {
            let w = wigner_transform(state)?;
            times_int.push(*t);
            n_signed.push(w.negative_volume());
            purity.push(state.purity());
            let write_this = q.write_all_wigner || k == 0 || k + 1 == result.snapshots.len();
            if write_this {
                let tag = if k == 0 {
                    "initial".to_string()
                } else if k + 1 == result.snapshots.len() {
                    "final".to_string()
                } else {
                    format!("{k}")
                };
                let base = out_dir.join(format!("wigner_{label}_{tag}"));
                let (b, j) = output::write_wigner(&base, &w, &units, label, t / omega)?;
                files.push(b);
                files.push(j);
                // marginal in SI units
                let lx = units.length();
                let marginal: Vec<(f64, f64)> = w
                    .x
                    .iter()
                    .zip(w.marginal_x())
                    .map(|(x, m)| (x * lx, m / lx))
                    .collect();
                let mpath = out_dir.join(format!("marginal_{label}_{tag}.csv"));
                output::write_series_csv(&mpath, "x_m,w_x_per_m", &marginal)?;
                files.push(mpath);
            }
        }
        let n_magnitude: Vec<f64> = n_signed.iter().map(|v| v.abs()).collect();
        let delta_n: Vec<f64> = n_magnitude.iter().map(|v| v - n_magnitude[0]).collect();

        let report = NegativityReport {
            label: label.clone(),
            initial_state: *spec,
            omega_t_over_2pi: times_int.iter().map(|t| t / period_int).collect(),
            times_s: times_int.iter().map(|t| t / omega).collect(),
            negativity_signed: n_signed.clone(),
            negativity_magnitude: n_magnitude.clone(),
            delta_n: delta_n.clone(),
            purity: purity.clone(),
        };
        let rpath = out_dir.join(format!("negativity_{label}.json"));
        output::write_json(&rpath, &report)?;
        files.push(rpath);

        // population distribution of the initial state
        let n_max = match *spec {
            InitialState::Fock { n } => n + 20,
            InitialState::BlurredFock { n_center, sigma_n } => {
                n_center + (6.0 * sigma_n).ceil() as usize
            }
            _ => 60,
        };
        let pops = rho0.fock_populations(n_max);
        let ppath = out_dir.join(format!("populations_{label}.json"));
        output::write_json(&ppath, &json!({ "label": label, "p_n": pops }))?;
        files.push(ppath);

        // two-peak structure of the final marginal
        let final_state = &result.snapshots.last().expect("final snapshot").1;
        let wf = wigner_transform(final_state)?;
        let peaks = marginal_peaks(&wf.x, &wf.marginal_x());
        let w0_init = wigner_transform(&rho0)?;
        let peaks0 = marginal_peaks(&w0_init.x, &w0_init.marginal_x());

        state_summaries.push(json!({
            "label": label,
            "negativity_initial": n_signed.first(),
            "negativity_final": n_signed.last(),
            "delta_n_final": delta_n.last(),
            "delta_n_max": delta_n.iter().cloned().fold(f64::MIN, f64::max),
            "purity_initial": purity.first(),
            "purity_final": purity.last(),
            "final_marginal_peaks_units": peaks,
            "initial_marginal_peaks_units": peaks0,
            "grid_points": q.n_points,
            "steps": result.steps,
        }));
    }

    let summary = json!({
        "kind": "quantum",
        "extent_units": extent,
        "u0_over_hbar_omega": u0_int,
        "waist_units": w0_int,
        "states": state_summaries,
    });
    Ok((files, summary, notes))
}

// ---------------------------------------------------------------------------
// calibration
// ---------------------------------------------------------------------------

fn run_calibrate(
    config: &RunConfig,
    out_dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value, Vec<String>)> {
    let sys = langevin_system(config)?;
    let sim = config
        .sim
        .as_ref()
        .ok_or_else(|| Error::config("sim", "section required"))?;
    // hold the control at 1 regardless of any protocol section
    let protocol = PulseProtocol::new(0.5, 1.0, 1.0, 0, 1, 0.0).expect("static protocol");

    let trajs = run_ensemble_recorded(&protocol, sim, &sys)?;
    let mut files = Vec::new();
    let notes = Vec::new();

    // pooled equipartition statistics
    let mut sum2 = 0.0;
    let mut count = 0usize;
    for t in &trajs {
        for &x in &t.positions {
            sum2 += x * x;
            count += 1;
        }
    }
    let var_measured = sum2 / count as f64;
    let omega = sys.omega_high();
    let var_expected =
        crate::constants::BOLTZMANN * sys.temperature / (sys.mass * omega * omega);

    // Welch PSD averaged across trajectories
    let dt_rec = trajs[0].times[1] - trajs[0].times[0];
    let sample_rate = 1.0 / dt_rec;
    let segment = (trajs[0].positions.len() / 8)
        .next_power_of_two()
        .clamp(1024, 16384);
    let mut freq: Vec<f64> = Vec::new();
    let mut psd_acc: Vec<f64> = Vec::new();
    for t in &trajs {
        let (f, p) = welch_psd(&t.positions, sample_rate, segment);
        if psd_acc.is_empty() {
            freq = f;
            psd_acc = p;
        } else {
            for (a, b) in psd_acc.iter_mut().zip(&p) {
                *a += b;
            }
        }
    }
    for v in &mut psd_acc {
        *v /= trajs.len() as f64;
    }
    let psd_path = out_dir.join("psd.csv");
    output::write_series_csv(
        &psd_path,
        "freq_hz,psd_m2_per_hz",
        &freq.iter().cloned().zip(psd_acc.iter().cloned()).collect::<Vec<_>>(),
    )?;
    files.push(psd_path);

    let duration = sim.duration;
    let fit = fit_lorentzian(&freq, &psd_acc, Some(duration))?;
    let gamma_expected = sys.damping;
    let report = json!({
        "omega0_rad_s": fit.omega0,
        "f0_hz": fit.omega0 / (2.0 * std::f64::consts::PI),
        "omega_config_rad_s": omega,
        "omega_relative_error": (fit.omega0 - omega).abs() / omega,
        "gamma_fit_s": fit.gamma,
        "gamma_expected_s": gamma_expected,
        "gamma_relative_error": (fit.gamma - gamma_expected).abs() / gamma_expected,
        "var_x_measured_m2": var_measured,
        "var_x_expected_m2": var_expected,
        "equipartition_ratio": var_measured / var_expected,
        "fit_converged": fit.converged,
        "n_trajectories": trajs.len(),
    });
    let rpath = out_dir.join("calibration.json");
    output::write_json(&rpath, &report)?;
    files.push(rpath);

    Ok((files, report, notes))
}

// ---------------------------------------------------------------------------
// standalone analysis entry points (CLI `analyze`)
// ---------------------------------------------------------------------------

pub fn analyze_psd(input: &Path, out_dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let (t, x) = output::read_trace_csv(input)?;
    let dt = t[1] - t[0];
    if !(dt > 0.0) {
        return Err(Error::Other("trace times not increasing".into()));
    }
    for w in t.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt.abs() {
            return Err(Error::Other("trace not uniformly sampled".into()));
        }
    }
    let fit = analysis::psd_lorentzian_calibration(&x, 1.0 / dt)?;
    let path = out_dir.join("spectrum_fit.json");
    output::write_json(&path, &fit)?;
    let summary = json!({
        "omega0_rad_s": fit.omega0,
        "f0_hz": fit.omega0 / (2.0 * std::f64::consts::PI),
        "gamma_s": fit.gamma,
        "converged": fit.converged,
    });
    Ok(RunReport {
        files: vec![path],
        summary,
    })
}

pub fn analyze_bimodality(
    input: &Path,
    snapshot: Option<usize>,
    bandwidth_m: Option<f64>,
    out_dir: &Path,
) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let groups = output::read_snapshots_csv(input)?;
    let idx = snapshot.unwrap_or(groups.len() - 1);
    if idx >= groups.len() {
        return Err(Error::Other(format!(
            "snapshot {idx} out of range ({} available)",
            groups.len()
        )));
    }
    let (time, points) = &groups[idx];
    let bw = match bandwidth_m {
        Some(h) => Bandwidth::Fixed(h),
        None => Bandwidth::Silverman,
    };
    let density = phase_space_density(points, None, bw)?;
    let marginal = position_marginal(&density);
    let fit = fit_double_gaussian(&marginal.x, &marginal.density)?;
    let a_d = ashman_d(&fit);
    let report = json!({
        "snapshot_index": idx,
        "time_s": time,
        "n_points": points.len(),
        "fit": fit,
        "ashman_d": a_d,
    });
    let path = out_dir.join("bimodality.json");
    output::write_json(&path, &report)?;
    let mpath = out_dir.join("marginal.csv");
    output::write_marginal_csv(&mpath, &marginal)?;
    Ok(RunReport {
        files: vec![path, mpath],
        summary: report,
    })
}

pub fn analyze_relaxation(input: &Path, out_dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let series = output::read_series_csv(input)?;
    let t: Vec<f64> = series.iter().map(|p| p.0).collect();
    // accept either std or variance columns; fit the square
    let var: Vec<f64> = series.iter().map(|p| p.1 * p.1).collect();
    let fit = relaxation_time(&t, &var)?;
    let report = json!({
        "tau_s": fit.tau,
        "var0": fit.var0,
        "var_inf": fit.var_inf,
        "converged": fit.converged,
    });
    let path = out_dir.join("relaxation.json");
    output::write_json(&path, &report)?;
    Ok(RunReport {
        files: vec![path],
        summary: report,
    })
}

/// Convert an artifact file into gnuplot-ready whitespace-separated columns.
pub fn plot_data(input: &Path, out_dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let name = input
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("data");
    let stem = input
        .file_stem()
        .and_then(|n| n.to_str())
        .unwrap_or("data");
    let mut files = Vec::new();

    if name.starts_with("snapshots") && name.ends_with(".csv") {
        let groups = output::read_snapshots_csv(input)?;
        for (k, (time, points)) in groups.iter().enumerate() {
            let path = out_dir.join(format!("{stem}_snapshot_{k}.dat"));
            let mut out = String::with_capacity(points.len() * 32);
            out.push_str(&format!("# t_s = {time}\n# x_m p_over_momega_m\n"));
            for (x, p) in points {
                out.push_str(&format!("{x} {p}\n"));
            }
            std::fs::write(&path, out)?;
            files.push(path);
        }
    } else if name.ends_with(".bin") {
        // Wigner matrix: needs the JSON header next to it
        let header_path = input.with_extension("json");
        let header: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(&header_path)
                .map_err(|e| Error::Other(format!("missing header {}: {e}", header_path.display())))?,
        )
        .map_err(|e| Error::Other(format!("bad header: {e}")))?;
        let n_x = header["n_x"].as_u64().unwrap_or(0) as usize;
        let n_p = header["n_p"].as_u64().unwrap_or(0) as usize;
        let x0 = header["x_min_m"].as_f64().unwrap_or(0.0);
        let dx = header["dx_m"].as_f64().unwrap_or(1.0);
        let p0 = header["p_min_kg_m_s"].as_f64().unwrap_or(0.0);
        let dp = header["dp_kg_m_s"].as_f64().unwrap_or(1.0);
        let bytes = std::fs::read(input)?;
        if bytes.len() != n_x * n_p * 8 {
            return Err(Error::Other("binary size does not match header".into()));
        }
        let path = out_dir.join(format!("{stem}.dat"));
        let mut out = String::new();
        out.push_str("# x_m p_kg_m_s w\n");
        for i in 0..n_x {
            for j in 0..n_p {
                let off = (i * n_p + j) * 8;
                let v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                out.push_str(&format!("{} {} {}\n", x0 + i as f64 * dx, p0 + j as f64 * dp, v));
            }
            out.push('\n');
        }
        std::fs::write(&path, out)?;
        files.push(path);
    } else if name.ends_with(".csv") {
        // generic CSV -> space separated
        let text = std::fs::read_to_string(input)?;
        let path = out_dir.join(format!("{stem}.dat"));
        let mut out = String::with_capacity(text.len());
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                out.push_str(&format!("# {}\n", line.replace(',', " ")));
            } else {
                out.push_str(&line.replace(',', " "));
                out.push('\n');
            }
        }
        std::fs::write(&path, out)?;
        files.push(path);
    } else {
        return Err(Error::Other(format!("unsupported input: {name}")));
    }
    Ok(RunReport {
        summary: json!({"files": files.len()}),
        files,
    })
}
