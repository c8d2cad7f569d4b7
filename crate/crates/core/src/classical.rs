//! Stochastic trajectory integration under the pulse protocol.
//!
//! Velocity-form Langevin dynamics with gas damping and a control-scaled
//! optical force:
//!
//!   dv = (-Γ v + S(t) F(x)/m) dt + sqrt(2 Γ kB T / m) dW
//!   dx = v dt
//!
//! Integration steps are aligned to the control-window boundaries: each
//! constant-S segment is split into equal substeps no longer than `dt`, so a
//! window edge is never rounded to the nearest step. The default scheme
//! updates the velocity first and advances the position with the new
//! velocity; plain explicit Euler-Maruyama is available as a switch.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::protocol::PulseProtocol;
use crate::trap::InvertedGaussianTrap;

/// Integration scheme for the stochastic step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationScheme {
    /// Velocity update first, position advanced with the new velocity.
    #[default]
    SemiImplicit,
    /// Position advanced with the old velocity.
    ExplicitEuler,
}

/// Force law used by the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ForceModel {
    /// Full inverted-Gaussian gradient force.
    #[default]
    Gaussian,
    /// Linear restoring force -m ω² x (harmonic reference dynamics).
    Linearized,
}

/// Physics bundle handed to the integrator.
#[derive(Debug, Clone, Serialize)]
pub struct LangevinSystem {
    /// Particle mass, kg.
    pub mass: f64,
    /// Gas damping rate Γ, 1/s.
    pub damping: f64,
    /// Gas temperature, K.
    pub temperature: f64,
    /// Trap at the high power level; the control S(t) scales its depth.
    pub trap: InvertedGaussianTrap,
    pub force_model: ForceModel,
}

impl LangevinSystem {
    /// Trap frequency at S = 1, rad/s.
    pub fn omega_high(&self) -> f64 {
        self.trap.frequency(self.mass)
    }

    /// Full-power force at position x, N.
    #[inline]
    pub fn force(&self, x: f64) -> f64 {
        match self.force_model {
            ForceModel::Gaussian => self.trap.force(x),
            ForceModel::Linearized => {
                let omega = self.omega_high();
                -self.mass * omega * omega * x
            }
        }
    }
}

/// Integration and ensemble settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Maximum step, s. Segments are subdivided into equal substeps <= dt.
    pub dt: f64,
    /// Total integration time, s.
    pub duration: f64,
    /// Times at which ensemble snapshots are taken (sorted, within duration).
    pub snapshot_times: Vec<f64>,
    pub n_trajectories: usize,
    pub master_seed: u64,
    /// Trajectories with |x| beyond this bound are flagged as escaped, m.
    pub escape_bound: f64,
    /// Record every k-th step into the trajectory arrays; 0 disables
    /// recording (snapshots only).
    pub record_stride: usize,
    pub scheme: IntegrationScheme,
}

impl SimConfig {
    /// Default step: min(T_period/1000, tau_low/50).
    pub fn default_dt(omega_high: f64, tau_low: f64) -> f64 {
        let period = 2.0 * std::f64::consts::PI / omega_high;
        (period / 1000.0).min(tau_low / 50.0)
    }

    pub fn validate(&self, omega_high: f64) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::invalid_param("sim.dt", "must be > 0"));
        }
        let period = 2.0 * std::f64::consts::PI / omega_high;
        if self.dt > period / 200.0 {
            return Err(Error::invalid_param(
                "sim.dt",
                format!(
                    "must be <= T_period/200 = {:.3e} s for omega = {:.3e} rad/s",
                    period / 200.0,
                    omega_high
                ),
            ));
        }
        if !(self.duration > 0.0) {
            return Err(Error::invalid_param("sim.duration", "must be > 0"));
        }
        if !(self.escape_bound > 0.0) {
            return Err(Error::invalid_param("sim.escape_bound", "must be > 0"));
        }
        for w in self.snapshot_times.windows(2) {
            if w[1] < w[0] {
                return Err(Error::invalid_param(
                    "sim.snapshot_times",
                    "must be sorted ascending",
                ));
            }
        }
        if let Some(&last) = self.snapshot_times.last() {
            if last > self.duration * (1.0 + 1e-12) {
                return Err(Error::invalid_param(
                    "sim.snapshot_times",
                    "must lie within duration",
                ));
            }
        }
        if self.n_trajectories == 0 {
            return Err(Error::invalid_param("sim.n_trajectories", "must be >= 1"));
        }
        Ok(())
    }
}

/// One integrated sample path.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub escaped: bool,
    pub seed: u64,
}

/// Phase-space point of one trajectory at a snapshot time. The momentum
/// coordinate is stored in position units, p/(mω) = v/ω, so a thermal state
/// is isotropic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SnapshotPoint {
    pub trajectory_index: u32,
    pub x: f64,
    pub p_scaled: f64,
}

/// Stroboscopic ensemble output.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleResult {
    pub snapshot_times: Vec<f64>,
    /// One point list per snapshot time; trajectories that escaped before a
    /// snapshot are absent from it.
    pub snapshots: Vec<Vec<SnapshotPoint>>,
    pub n_escaped: usize,
    pub n_trajectories: usize,
    /// Reference frequency used for the momentum scaling, rad/s.
    pub omega_ref: f64,
}

impl EnsembleResult {
    /// (x, p/(mω)) pairs of one snapshot.
    pub fn points(&self, snapshot: usize) -> Vec<(f64, f64)> {
        self.snapshots[snapshot]
            .iter()
            .map(|p| (p.x, p.p_scaled))
            .collect()
    }
}

/// Per-trajectory stream seed: SplitMix64 scrambler applied to
/// master_seed + (index+1)·0x9E3779B97F4A7C15. The streams feed ChaCha8
/// generators, so ensembles reproduce for a given (master_seed, index) pair
/// regardless of execution order or thread count.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Draw (x, v) from the thermal state of a harmonic trap:
/// x ~ N(0, kB T/(m ω²)), v ~ N(0, kB T/m), independent.
pub fn sample_thermal_state<R: Rng>(
    rng: &mut R,
    mass: f64,
    omega: f64,
    temperature: f64,
) -> (f64, f64) {
    let sigma_v = (BOLTZMANN * temperature / mass).sqrt();
    let sigma_x = sigma_v / omega;
    let nx: f64 = rng.sample(StandardNormal);
    let nv: f64 = rng.sample(StandardNormal);
    (sigma_x * nx, sigma_v * nv)
}

/// One stochastic step of length `h` at control value `s`.
#[inline]
pub fn euler_maruyama_step<R: Rng>(
    state: (f64, f64),
    h: f64,
    s: f64,
    sys: &LangevinSystem,
    noise_amp: f64,
    scheme: IntegrationScheme,
    rng: &mut R,
) -> (f64, f64) {
    let (x, v) = state;
    let n: f64 = rng.sample(StandardNormal);
    let accel = -sys.damping * v + s * sys.force(x) / sys.mass;
    match scheme {
        IntegrationScheme::SemiImplicit => {
            let v_new = v + h * accel + noise_amp * h.sqrt() * n;
            (x + h * v_new, v_new)
        }
        IntegrationScheme::ExplicitEuler => {
            let v_new = v + h * accel + noise_amp * h.sqrt() * n;
            (x + h * v, v_new)
        }
    }
}

/// Velocity-noise amplitude sqrt(2 Γ kB T / m), (m/s)/sqrt(s).
fn noise_amplitude(sys: &LangevinSystem) -> f64 {
    (2.0 * sys.damping * BOLTZMANN * sys.temperature / sys.mass).sqrt()
}

struct StepOutcome {
    escaped: bool,
}

/// Drive one trajectory, invoking `on_sample(step, t, x, v)` for the initial
/// state and after every step. Returns early when the trajectory escapes.
fn integrate<R: Rng>(
    init: (f64, f64),
    seed: u64,
    protocol: &PulseProtocol,
    cfg: &SimConfig,
    sys: &LangevinSystem,
    rng: &mut R,
    mut on_sample: impl FnMut(u64, f64, f64, f64),
) -> Result<StepOutcome> {
    let noise_amp = noise_amplitude(sys);
    let (mut x, mut v) = init;
    let mut step: u64 = 0;
    on_sample(step, 0.0, x, v);
    for seg in protocol.segments(cfg.duration) {
        let len = seg.end - seg.start;
        let n_sub = (len / cfg.dt).ceil().max(1.0) as u64;
        let h = len / n_sub as f64;
        for k in 0..n_sub {
            let (xn, vn) =
                euler_maruyama_step((x, v), h, seg.s, sys, noise_amp, cfg.scheme, rng);
            if !xn.is_finite() || !vn.is_finite() {
                return Err(Error::NonFiniteState { seed, step });
            }
            x = xn;
            v = vn;
            step += 1;
            let t = if k + 1 == n_sub {
                seg.end
            } else {
                seg.start + (k + 1) as f64 * h
            };
            on_sample(step, t, x, v);
            if x.abs() > cfg.escape_bound {
                return Ok(StepOutcome { escaped: true });
            }
        }
    }
    Ok(StepOutcome { escaped: false })
}

/// Integrate a single trajectory, recording every `record_stride`-th step
/// (stride 0 records nothing but the initial state).
pub fn simulate_trajectory(
    init: (f64, f64),
    seed: u64,
    protocol: &PulseProtocol,
    cfg: &SimConfig,
    sys: &LangevinSystem,
) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stride = cfg.record_stride.max(1) as u64;
    let mut traj = Trajectory {
        times: Vec::new(),
        positions: Vec::new(),
        velocities: Vec::new(),
        escaped: false,
        seed,
    };
    let outcome = integrate(init, seed, protocol, cfg, sys, &mut rng, |step, t, x, v| {
        if step % stride == 0 {
            traj.times.push(t);
            traj.positions.push(x);
            traj.velocities.push(v);
        }
    })?;
    traj.escaped = outcome.escaped;
    Ok(traj)
}

/// Collects the state at the integration step nearest each snapshot time.
struct SnapshotCollector<'a> {
    times: &'a [f64],
    next: usize,
    prev: (f64, f64, f64),
    filled: Vec<Option<(f64, f64)>>,
}

impl<'a> SnapshotCollector<'a> {
    fn new(times: &'a [f64]) -> Self {
        SnapshotCollector {
            times,
            next: 0,
            prev: (0.0, 0.0, 0.0),
            filled: vec![None; times.len()],
        }
    }

    fn observe(&mut self, t: f64, x: f64, v: f64) {
        while self.next < self.times.len() && self.times[self.next] <= t {
            let ts = self.times[self.next];
            let (tp, xp, vp) = self.prev;
            self.filled[self.next] = if t - ts <= ts - tp {
                Some((x, v))
            } else {
                Some((xp, vp))
            };
            self.next += 1;
        }
        self.prev = (t, x, v);
    }
}

struct TrajectoryOutcome {
    snapshots: Vec<Option<(f64, f64)>>,
    escaped: bool,
}

fn run_one(
    index: usize,
    protocol: &PulseProtocol,
    cfg: &SimConfig,
    sys: &LangevinSystem,
) -> Result<TrajectoryOutcome> {
    let seed = trajectory_seed(cfg.master_seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = sys.omega_high();
    let init = sample_thermal_state(&mut rng, sys.mass, omega, sys.temperature);
    let mut collector = SnapshotCollector::new(&cfg.snapshot_times);
    let outcome = integrate(init, seed, protocol, cfg, sys, &mut rng, |_, t, x, v| {
        collector.observe(t, x, v)
    })?;
    Ok(TrajectoryOutcome {
        snapshots: collector.filled,
        escaped: outcome.escaped,
    })
}

/// Run `n_trajectories` independent trajectories (in parallel) and assemble
/// the stroboscopic snapshots. Deterministic for a given master seed,
/// independent of thread count. Fails if more than half the ensemble
/// escapes.
pub fn run_ensemble(
    protocol: &PulseProtocol,
    cfg: &SimConfig,
    sys: &LangevinSystem,
) -> Result<EnsembleResult> {
    let omega = sys.omega_high();
    cfg.validate(omega)?;
    let outcomes: Vec<TrajectoryOutcome> = (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|i| run_one(i, protocol, cfg, sys))
        .collect::<Result<Vec<_>>>()?;

    let n_escaped = outcomes.iter().filter(|o| o.escaped).count();
    if 2 * n_escaped > cfg.n_trajectories {
        return Err(Error::TooManyEscapes {
            escaped: n_escaped,
            total: cfg.n_trajectories,
        });
    }

    let mut snapshots = vec![Vec::new(); cfg.snapshot_times.len()];
    for (i, outcome) in outcomes.iter().enumerate() {
        for (k, slot) in outcome.snapshots.iter().enumerate() {
            if let Some((x, v)) = slot {
                snapshots[k].push(SnapshotPoint {
                    trajectory_index: i as u32,
                    x: *x,
                    p_scaled: v / omega,
                });
            }
        }
    }
    Ok(EnsembleResult {
        snapshot_times: cfg.snapshot_times.clone(),
        snapshots,
        n_escaped,
        n_trajectories: cfg.n_trajectories,
        omega_ref: omega,
    })
}

/// Run the ensemble keeping the full recorded trajectories (requires
/// `record_stride` >= 1). Used by the calibration and relaxation pipelines.
pub fn run_ensemble_recorded(
    protocol: &PulseProtocol,
    cfg: &SimConfig,
    sys: &LangevinSystem,
) -> Result<Vec<Trajectory>> {
    let omega = sys.omega_high();
    cfg.validate(omega)?;
    if cfg.record_stride == 0 {
        return Err(Error::invalid_param(
            "sim.record_stride",
            "must be >= 1 for recorded ensembles",
        ));
    }
    (0..cfg.n_trajectories)
        .into_par_iter()
        .map(|i| {
            let seed = trajectory_seed(cfg.master_seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let init = sample_thermal_state(&mut rng, sys.mass, omega, sys.temperature);
            let mut traj = Trajectory {
                times: Vec::new(),
                positions: Vec::new(),
                velocities: Vec::new(),
                escaped: false,
                seed,
            };
            let stride = cfg.record_stride as u64;
            let outcome =
                integrate(init, seed, protocol, cfg, sys, &mut rng, |step, t, x, v| {
                    if step % stride == 0 {
                        traj.times.push(t);
                        traj.positions.push(x);
                        traj.velocities.push(v);
                    }
                })?;
            traj.escaped = outcome.escaped;
            Ok(traj)
        })
        .collect()
}

/// Windowed ensemble standard deviation of the position: samples from all
/// trajectories are pooled into time bins of the given width. Bins with
/// fewer than two samples are skipped.
pub fn variance_timeseries(trajectories: &[Trajectory], window: f64) -> Vec<(f64, f64)> {
    if trajectories.is_empty() || !(window > 0.0) {
        return Vec::new();
    }
    let t_max = trajectories
        .iter()
        .filter_map(|t| t.times.last())
        .fold(0.0f64, |a, &b| a.max(b));
    let n_bins = (t_max / window).ceil() as usize + 1;
    let mut sum = vec![0.0f64; n_bins];
    let mut sum2 = vec![0.0f64; n_bins];
    let mut count = vec![0usize; n_bins];
    for traj in trajectories {
        for (&t, &x) in traj.times.iter().zip(&traj.positions) {
            let bin = (t / window) as usize;
            if bin < n_bins {
                sum[bin] += x;
                sum2[bin] += x * x;
                count[bin] += 1;
            }
        }
    }
    (0..n_bins)
        .filter(|&b| count[b] >= 2)
        .map(|b| {
            let n = count[b] as f64;
            let mean = sum[b] / n;
            let var = (sum2[b] / n - mean * mean).max(0.0);
            ((b as f64 + 0.5) * window, var.sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{GasEnvironment, ParticleSpec, DEFAULT_GAS_MOLECULAR_MASS};
    use crate::physics::gas_damping_rate;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn paper_system(pressure: f64) -> LangevinSystem {
        let particle = ParticleSpec::new(230e-9, 2200.0, 1.44).unwrap();
        let gas = GasEnvironment::new(pressure, 300.0, DEFAULT_GAS_MOLECULAR_MASS).unwrap();
        let omega = TAU * 77e3;
        let trap =
            InvertedGaussianTrap::from_frequency_and_xi(omega, -0.1e12, particle.mass()).unwrap();
        LangevinSystem {
            mass: particle.mass(),
            damping: gas_damping_rate(&particle, &gas),
            temperature: gas.temperature,
            trap,
            force_model: ForceModel::Gaussian,
        }
    }

    fn quiet_system() -> LangevinSystem {
        let mut sys = paper_system(1.0);
        sys.damping = 0.0;
        sys.temperature = 0.0;
        sys
    }

    #[test]
    fn thermal_sampling_statistics() {
        let sys = paper_system(1.0);
        let omega = sys.omega_high();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let (mut sx2, mut sxv) = (0.0, 0.0);
        for _ in 0..n {
            let (x, v) = sample_thermal_state(&mut rng, sys.mass, omega, sys.temperature);
            sx2 += x * x;
            sxv += x * v;
        }
        let var_x = sx2 / n as f64;
        let expect = BOLTZMANN * 300.0 / (sys.mass * omega * omega);
        assert!((var_x / expect - 1.0).abs() < 0.03);
        // <x v> consistent with zero at 3 sigma
        let sigma_prod = expect.sqrt() * (BOLTZMANN * 300.0 / sys.mass).sqrt();
        assert!((sxv / n as f64).abs() < 3.0 * sigma_prod / (n as f64).sqrt());
    }

    #[test]
    fn thermal_sampling_zero_temperature() {
        let sys = paper_system(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, v) = sample_thermal_state(&mut rng, sys.mass, sys.omega_high(), 0.0);
        assert_eq!(x, 0.0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn free_particle_ballistic() {
        let mut sys = quiet_system();
        sys.force_model = ForceModel::Linearized;
        sys.trap = InvertedGaussianTrap::new(1e-30, 1.0).unwrap(); // negligible force
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = 1e-8;
        let state = euler_maruyama_step(
            (1e-6, 0.5),
            h,
            1.0,
            &sys,
            0.0,
            IntegrationScheme::ExplicitEuler,
            &mut rng,
        );
        assert!((state.0 - (1e-6 + 0.5 * h)).abs() < 1e-20);
    }

    #[test]
    fn energy_drift_harmonic_regime() {
        // no damping, no noise, small amplitude: energy after one period
        // within 1e-3 of the initial value at dt = T/1000
        let sys = quiet_system();
        let omega = sys.omega_high();
        let period = TAU / omega;
        let x0 = 5e-9; // well inside the harmonic region
        let protocol = PulseProtocol::new(0.5, 1.0, 1.0, 0, 1, 0.0).unwrap();
        let cfg = SimConfig {
            dt: period / 1000.0,
            duration: period,
            snapshot_times: vec![],
            n_trajectories: 1,
            master_seed: 0,
            escape_bound: 1.0,
            record_stride: 1,
            scheme: IntegrationScheme::SemiImplicit,
        };
        let traj = simulate_trajectory((x0, 0.0), 1, &protocol, &cfg, &sys).unwrap();
        let energy = |x: f64, v: f64| 0.5 * sys.mass * v * v + sys.trap.potential(x);
        let e0 = energy(x0, 0.0) - sys.trap.potential(0.0);
        let xf = *traj.positions.last().unwrap();
        let vf = *traj.velocities.last().unwrap();
        let ef = energy(xf, vf) - sys.trap.potential(0.0);
        assert!(
            ((ef - e0) / e0).abs() < 1e-3,
            "relative drift {}",
            (ef - e0) / e0
        );
    }

    #[test]
    fn equipartition_long_run() {
        // S = 1 at 5 mbar: <x^2> -> kB T/(m omega^2) within 5%
        let sys = paper_system(500.0);
        let omega = sys.omega_high();
        let period = TAU / omega;
        let protocol = PulseProtocol::new(0.5, 1.0, 1.0, 0, 1, 0.0).unwrap();
        let cfg = SimConfig {
            dt: period / 1000.0,
            duration: 8e-3,
            snapshot_times: vec![],
            n_trajectories: 12,
            master_seed: 99,
            escape_bound: 3.0 * sys.trap.waist(),
            record_stride: 4,
            scheme: IntegrationScheme::SemiImplicit,
        };
        let trajs = run_ensemble_recorded(&protocol, &cfg, &sys).unwrap();
        // discard the first millisecond (transient)
        let mut sum2 = 0.0;
        let mut count = 0usize;
        for t in &trajs {
            for (&tt, &x) in t.times.iter().zip(&t.positions) {
                if tt > 1e-3 {
                    sum2 += x * x;
                    count += 1;
                }
            }
        }
        let var = sum2 / count as f64;
        let expect = BOLTZMANN * sys.temperature / (sys.mass * omega * omega);
        assert!(
            (var / expect - 1.0).abs() < 0.05,
            "<x^2>/expected = {}",
            var / expect
        );
    }

    #[test]
    fn seed_determinism_and_stream_independence() {
        let s1 = trajectory_seed(42, 0);
        let s2 = trajectory_seed(42, 1);
        assert_ne!(s1, s2);
        assert_eq!(s1, trajectory_seed(42, 0));

        let sys = paper_system(1.0);
        let protocol =
            PulseProtocol::with_quarter_period_timing(sys.omega_high(), 0.71, 5).unwrap();
        let cfg = SimConfig {
            dt: SimConfig::default_dt(sys.omega_high(), protocol.tau_low),
            duration: protocol.train_duration(),
            snapshot_times: vec![protocol.train_duration()],
            n_trajectories: 16,
            master_seed: 42,
            escape_bound: 3.0 * sys.trap.waist(),
            record_stride: 0,
            scheme: IntegrationScheme::SemiImplicit,
        };
        let a = run_ensemble(&protocol, &cfg, &sys).unwrap();
        let b = run_ensemble(&protocol, &cfg, &sys).unwrap();
        for (pa, pb) in a.snapshots[0].iter().zip(&b.snapshots[0]) {
            assert_eq!(pa.x.to_bits(), pb.x.to_bits());
            assert_eq!(pa.p_scaled.to_bits(), pb.p_scaled.to_bits());
        }
    }

    #[test]
    fn no_pulses_is_thermal_relaxation() {
        // n_pulses = 0 keeps S = 1 everywhere
        let p = PulseProtocol::new(0.71, 1e-6, 1e-6, 0, 1, 0.0).unwrap();
        for t in [0.0, 1e-7, 5e-4, 1.0] {
            assert_eq!(p.control(t), 1.0);
        }
    }

    #[test]
    fn escape_flagging_and_monotonicity() {
        let mut sys = quiet_system();
        sys.force_model = ForceModel::Linearized;
        let omega = sys.omega_high();
        let period = TAU / omega;
        let protocol = PulseProtocol::new(0.5, 1.0, 1.0, 0, 1, 0.0).unwrap();
        let run_with_bound = |bound: f64| {
            let cfg = SimConfig {
                dt: period / 1000.0,
                duration: period,
                snapshot_times: vec![],
                n_trajectories: 1,
                master_seed: 0,
                escape_bound: bound,
                record_stride: 1,
                scheme: IntegrationScheme::SemiImplicit,
            };
            simulate_trajectory((1e-6, 0.0), 1, &protocol, &cfg, &sys)
                .unwrap()
                .escaped
        };
        assert!(run_with_bound(0.5e-6)); // oscillation amplitude 1e-6 exceeds bound
        assert!(!run_with_bound(2e-6));
    }

    #[test]
    fn variance_series_stationary_thermal() {
        let sys = paper_system(500.0);
        let omega = sys.omega_high();
        let period = TAU / omega;
        let protocol = PulseProtocol::new(0.5, 1.0, 1.0, 0, 1, 0.0).unwrap();
        let cfg = SimConfig {
            dt: period / 1000.0,
            duration: 4e-3,
            snapshot_times: vec![],
            n_trajectories: 24,
            master_seed: 5,
            escape_bound: 3.0 * sys.trap.waist(),
            record_stride: 8,
            scheme: IntegrationScheme::SemiImplicit,
        };
        let trajs = run_ensemble_recorded(&protocol, &cfg, &sys).unwrap();
        let series = variance_timeseries(&trajs, 0.5e-3);
        let sigma = (BOLTZMANN * sys.temperature / (sys.mass * omega * omega)).sqrt();
        assert!(series.len() >= 6);
        for &(_, std) in &series {
            assert!((std / sigma - 1.0).abs() < 0.15, "std/sigma = {}", std / sigma);
        }
    }
}
