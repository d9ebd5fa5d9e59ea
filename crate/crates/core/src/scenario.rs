//! Experiment definitions: wind profiles, operating modes and torque references.

use serde::{Deserialize, Serialize};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::turbine::TurbineParams;
use crate::{Error, Result};

/// Sample spacing of the turbulent wind process (s). Values in between are interpolated.
pub const TURBULENCE_SAMPLE_INTERVAL: f64 = 0.05;

fn default_time_scale() -> f64 {
    10.0
}

/// Wind speed as a function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindProfile {
    Constant {
        v0: f64,
    },
    /// `v0` before `t_step`, `v1` from `t_step` on (inclusive).
    Step {
        v0: f64,
        v1: f64,
        t_step: f64,
    },
    /// Linear from `v0` at `t0` to `v1` at `t1`, flat outside.
    Ramp {
        v0: f64,
        v1: f64,
        t0: f64,
        t1: f64,
    },
    /// Half-cosine bump of height `amplitude` over `[t_start, t_start + duration]`.
    Gust {
        v_base: f64,
        amplitude: f64,
        t_start: f64,
        duration: f64,
    },
    /// Seeded mean-reverting (Ornstein-Uhlenbeck) fluctuation around `v_base`;
    /// `intensity` is the standard deviation relative to `v_base`.
    Turbulent {
        v_base: f64,
        intensity: f64,
        seed: u64,
        /// Mean-reversion time (s).
        #[serde(default = "default_time_scale")]
        time_scale: f64,
    },
}

impl WindProfile {
    pub fn validate(&self) -> Result<()> {
        let speeds_ok = |vs: &[f64]| vs.iter().all(|v| v.is_finite() && *v >= 0.0);
        let ok = match *self {
            WindProfile::Constant { v0 } => speeds_ok(&[v0]),
            WindProfile::Step { v0, v1, t_step } => speeds_ok(&[v0, v1]) && t_step >= 0.0,
            WindProfile::Ramp { v0, v1, t0, t1 } => speeds_ok(&[v0, v1]) && t0 >= 0.0 && t1 > t0,
            WindProfile::Gust { v_base, amplitude, t_start, duration } => {
                speeds_ok(&[v_base]) && amplitude.is_finite() && t_start >= 0.0 && duration > 0.0
            }
            WindProfile::Turbulent { v_base, intensity, time_scale, .. } => {
                speeds_ok(&[v_base]) && intensity >= 0.0 && time_scale > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid wind profile {self:?}")))
        }
    }
}

/// Half-cosine gust bump added on top of a base speed.
pub fn gust_offset(t: f64, amplitude: f64, t_start: f64, duration: f64) -> f64 {
    if t < t_start || t > t_start + duration {
        return 0.0;
    }
    let phase = 2.0 * std::f64::consts::PI * (t - t_start) / duration;
    amplitude * (1.0 - phase.cos()) / 2.0
}

/// Evaluates a profile, caching the turbulent process so that sequential evaluation is O(1).
#[derive(Clone, Debug)]
pub struct WindField {
    profile: WindProfile,
    rng: Option<ChaCha8Rng>,
    samples: Vec<f64>,
}

impl WindField {
    pub fn new(profile: WindProfile) -> Self {
        let rng = match profile {
            WindProfile::Turbulent { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Self { profile, rng, samples: vec![0.0] }
    }

    pub fn profile(&self) -> &WindProfile {
        &self.profile
    }

    /// Unit-variance OU state at grid index `k`, extending the cached series as needed.
    fn process(&mut self, k: usize, time_scale: f64) -> f64 {
        let decay = (-TURBULENCE_SAMPLE_INTERVAL / time_scale).exp();
        let drive = (1.0 - decay * decay).sqrt();
        if let Some(rng) = self.rng.as_mut() {
            while self.samples.len() <= k {
                let last = *self.samples.last().unwrap_or(&0.0);
                let z: f64 = StandardNormal.sample(rng);
                self.samples.push(decay * last + drive * z);
            }
        }
        self.samples[k]
    }

    pub fn at(&mut self, t: f64) -> f64 {
        let t = t.max(0.0);
        let v = match self.profile {
            WindProfile::Constant { v0 } => v0,
            WindProfile::Step { v0, v1, t_step } => {
                if t >= t_step {
                    v1
                } else {
                    v0
                }
            }
            WindProfile::Ramp { v0, v1, t0, t1 } => {
                if t <= t0 {
                    v0
                } else if t >= t1 {
                    v1
                } else {
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
            }
            WindProfile::Gust { v_base, amplitude, t_start, duration } => {
                v_base + gust_offset(t, amplitude, t_start, duration)
            }
            WindProfile::Turbulent { v_base, intensity, time_scale, .. } => {
                let pos = t / TURBULENCE_SAMPLE_INTERVAL;
                let k = pos.floor() as usize;
                let frac = pos - k as f64;
                let x0 = self.process(k, time_scale);
                let x1 = self.process(k + 1, time_scale);
                v_base * (1.0 + intensity * (x0 + frac * (x1 - x0)))
            }
        };
        v.max(0.0)
    }
}

/// Wind speed of `profile` at time `t`. Pure: the turbulent process is regenerated from its seed.
pub fn wind_at(t: f64, profile: &WindProfile) -> f64 {
    WindField::new(profile.clone()).at(t)
}

/// Operating mode of the turbine-side drive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Torque reference from the rotor characteristic at the measured speed.
    #[default]
    TurbineEmulation,
    /// Torque reference is the setpoint.
    TorqueControl,
    /// PI speed loop on the setpoint.
    SpeedControl,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::TurbineEmulation => "turbine_emulation",
            Mode::TorqueControl => "torque_control",
            Mode::SpeedControl => "speed_control",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "turbine_emulation" | "emulation" => Ok(Mode::TurbineEmulation),
            "torque_control" | "torque" => Ok(Mode::TorqueControl),
            "speed_control" | "speed" => Ok(Mode::SpeedControl),
            other => Err(Error::config(format!("unknown mode '{other}'"))),
        }
    }
}

/// Turbine-side load torque imposed by the generator controller.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadLaw {
    /// T = P*(ω)/ω = k·ω², which holds the rotor on the maximum-power locus.
    #[default]
    Mppt,
    /// T = coefficient·ω
    Drag {
        coefficient: f64,
    },
    Constant {
        torque: f64,
    },
    None,
}

/// A timed intervention during a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEvent {
    /// s
    pub at: f64,
    pub action: EventAction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventAction {
    /// Operator trip of the converter.
    Trip,
    /// Operator reset of a latched trip.
    Reset,
    /// Voltage spike added to the DC bus for `duration` seconds.
    DcSpike { volts: f64, duration: f64 },
    /// Replace the wind by a constant speed.
    SetWind { v: f64 },
    /// Superimpose a half-cosine gust starting now.
    Gust { amplitude: f64, duration: f64 },
}

fn default_dt() -> f64 {
    1e-3
}

/// The unit of experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub profile: WindProfile,
    #[serde(default)]
    pub mode: Mode,
    /// Torque (N·m) in torque control, speed (rad/s) in speed control.
    #[serde(default)]
    pub setpoint: Option<f64>,
    /// s
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub initial_omega: f64,
    #[serde(default)]
    pub load: LoadLaw,
    #[serde(default)]
    pub events: Vec<ScenarioEvent>,
}

impl Scenario {
    pub fn new(profile: WindProfile, duration: f64) -> Self {
        Self {
            profile,
            mode: Mode::TurbineEmulation,
            setpoint: None,
            duration,
            dt: default_dt(),
            initial_omega: 0.0,
            load: LoadLaw::Mppt,
            events: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::config(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.dt > 0.0 && self.dt <= self.duration) {
            return Err(Error::config(format!("dt must lie in (0, duration], got {}", self.dt)));
        }
        if !(self.initial_omega >= 0.0) {
            return Err(Error::config("initial rotor speed must be non-negative"));
        }
        check_setpoint(self.mode, self.setpoint)?;
        if let LoadLaw::Drag { coefficient } = self.load {
            if !(coefficient >= 0.0) {
                return Err(Error::config("drag coefficient must be non-negative"));
            }
        }
        for e in &self.events {
            if !(e.at >= 0.0) {
                return Err(Error::config(format!("event time must be non-negative: {e:?}")));
            }
        }
        Ok(())
    }

    /// Number of fixed steps in the run.
    pub fn steps(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }
}

/// Setpoint present iff the mode is not turbine emulation.
pub fn check_setpoint(mode: Mode, setpoint: Option<f64>) -> Result<()> {
    match (mode, setpoint) {
        (Mode::TurbineEmulation, None) => Ok(()),
        (Mode::TurbineEmulation, Some(_)) => Err(Error::config("turbine emulation takes no setpoint")),
        (_, Some(s)) if s.is_finite() => Ok(()),
        (m, _) => Err(Error::config(format!("{} requires a finite setpoint", m.as_str()))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlParams {
    /// Proportional gain of the speed loop (N·m·s/rad).
    pub kp: f64,
    /// Integral gain (N·m/rad).
    pub ki: f64,
    /// Back-calculation gain of the anti-windup (1/s).
    pub kb: f64,
    /// Minimum emulation torque while the rotor is below `omega_min` with wind present.
    pub breakaway_torque: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self { kp: 5.0, ki: 10.0, kb: 2.0, breakaway_torque: 0.0 }
    }
}

/// Integrator of the speed loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PiState {
    pub integral: f64,
}

impl PiState {
    /// One PI update with back-calculation anti-windup; output saturated at ±`limit`.
    pub fn update(&mut self, error: f64, dt: f64, gains: &ControlParams, limit: f64) -> f64 {
        let raw = gains.kp * error + self.integral;
        let out = raw.clamp(-limit, limit);
        self.integral += (gains.ki * error + gains.kb * (out - raw)) * dt;
        out
    }
}

/// Everything the torque reference needs besides the measurements.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceParams<'a> {
    pub turbine: &'a TurbineParams,
    pub control: &'a ControlParams,
    pub torque_limit: f64,
}

/// Torque reference for the drive in the given mode.
pub fn torque_reference(
    mode: Mode,
    measured_omega: f64,
    v: f64,
    setpoint: Option<f64>,
    params: &ReferenceParams<'_>,
    pi: &mut PiState,
    dt: f64,
) -> Result<f64> {
    if !(measured_omega >= 0.0) {
        return Err(Error::domain(format!("measured rotor speed must be non-negative, got {measured_omega}")));
    }
    check_setpoint(mode, setpoint)?;
    let limit = params.torque_limit;
    match (mode, setpoint) {
        (Mode::TurbineEmulation, _) => {
            let omega_min = params.turbine.omega_min;
            let torque = params.turbine.aerodynamic_torque(v, measured_omega.max(omega_min))?;
            if measured_omega < omega_min && v > 0.0 {
                Ok(torque.max(params.control.breakaway_torque))
            } else {
                Ok(torque)
            }
        }
        (Mode::TorqueControl, Some(t)) => Ok(t.clamp(-limit, limit)),
        (Mode::SpeedControl, Some(target)) => Ok(pi.update(target - measured_omega, dt, params.control, limit)),
        _ => unreachable!("setpoint checked above"),
    }
}
