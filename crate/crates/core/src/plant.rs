//! Electromechanical chain between the shaft and the grid.
//!
//! - [`DrivePlant`]: torque-controlled drive actuating the emulated turbine torque
//!   (transport delay, saturation, first-order lag).
//! - [`GeneratorModel`]: power-efficiency map of the PM generator and rectifier.
//! - [`ConverterState`]: DC bus, 4-bit network-converter level and the latched U_max trip.
//! - [`protection_check`]: software limits on speed, torque and power.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::telemetry::TelemetrySample;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveParams {
    /// Torque loop time constant τ_d (s).
    pub torque_time_constant: f64,
    /// Transport delay between reference and actuation (s).
    pub command_delay: f64,
    /// |applied torque| bound (N·m).
    pub torque_limit: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        Self { torque_time_constant: 0.005, command_delay: 0.005, torque_limit: 400.0 }
    }
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.torque_time_constant > 0.0) {
            return Err(Error::config("drive torque time constant must be positive"));
        }
        if !(self.command_delay >= 0.0) {
            return Err(Error::config("drive command delay must be non-negative"));
        }
        if !(self.torque_limit > 0.0) {
            return Err(Error::config("drive torque limit must be positive"));
        }
        Ok(())
    }
}

/// Drive with delayed, saturated, first-order torque response.
#[derive(Clone, Debug, PartialEq)]
pub struct DrivePlant {
    params: DriveParams,
    applied: f64,
    pending: VecDeque<f64>,
}

impl DrivePlant {
    pub fn new(params: DriveParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, applied: 0.0, pending: VecDeque::new() })
    }

    pub fn params(&self) -> &DriveParams {
        &self.params
    }

    pub fn applied_torque(&self) -> f64 {
        self.applied
    }

    pub fn saturate(&self, torque: f64) -> f64 {
        torque.clamp(-self.params.torque_limit, self.params.torque_limit)
    }

    /// Advances the drive by `dt` towards the reference issued `command_delay` ago.
    ///
    /// The lag is discretised exactly for a held input, so the response never overshoots
    /// whatever the ratio dt/τ_d. Before the delay line fills the delayed reference is 0.
    pub fn respond(&mut self, t_ref: f64, dt: f64) -> f64 {
        let depth = (self.params.command_delay / dt).round() as usize;
        self.pending.push_back(self.saturate(t_ref));
        let mut delayed = 0.0;
        while self.pending.len() > depth {
            delayed = self.pending.pop_front().unwrap_or(0.0);
        }
        let alpha = -(-dt / self.params.torque_time_constant).exp_m1();
        self.applied += alpha * (delayed - self.applied);
        self.applied = self.saturate(self.applied);
        self.applied
    }
}

pub fn drive_torque_response(t_ref: f64, plant: &mut DrivePlant, dt: f64) -> f64 {
    plant.respond(t_ref, dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorModel {
    /// Mechanical to electrical conversion efficiency, in (0, 1].
    pub eta_conv: f64,
    /// W
    pub rated_power: f64,
    /// rad/s (generator side)
    pub rated_speed: f64,
}

impl Default for GeneratorModel {
    fn default() -> Self {
        Self { eta_conv: 0.8, rated_power: 4000.0, rated_speed: 20.0 }
    }
}

impl GeneratorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_conv > 0.0 && self.eta_conv <= 1.0) {
            return Err(Error::config(format!("eta_conv must lie in (0, 1], got {}", self.eta_conv)));
        }
        if !(self.rated_power > 0.0 && self.rated_speed > 0.0) {
            return Err(Error::config("generator rating must be positive"));
        }
        Ok(())
    }
}

/// Electrical output min(η·P_mech, P_rated).
pub fn generator_electrical_power(p_mech: f64, model: &GeneratorModel) -> f64 {
    (model.eta_conv * p_mech.max(0.0)).min(model.rated_power)
}

/// Number of selectable converter levels on the 4-bit bus.
pub const CONVERTER_LEVELS: u8 = 16;

/// 4-bit level code: round-half-up of 15·clamp(p/P_rated, 0, 1).
pub fn converter_level_command(p_target: f64, rated_power: f64) -> u8 {
    let ratio = (p_target / rated_power).clamp(0.0, 1.0);
    let ratio = if ratio.is_nan() { 0.0 } else { ratio };
    let top = f64::from(CONVERTER_LEVELS - 1);
    (top * ratio + 0.5).floor().min(top) as u8
}

/// DC-bus voltage model U* = U_0 + k·P_exported (+ any injected spike).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcBusModel {
    /// V
    pub no_load_voltage: f64,
    /// V/W
    pub volts_per_watt: f64,
    /// Trip threshold U_max (V).
    pub u_max: f64,
}

impl Default for DcBusModel {
    fn default() -> Self {
        Self { no_load_voltage: 300.0, volts_per_watt: 0.02, u_max: 400.0 }
    }
}

impl DcBusModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_max > 0.0) {
            return Err(Error::config("u_max must be positive"));
        }
        if !(self.no_load_voltage >= 0.0 && self.volts_per_watt >= 0.0) {
            return Err(Error::config("dc bus coefficients must be non-negative"));
        }
        Ok(())
    }

    pub fn voltage(&self, p_exported: f64) -> f64 {
        self.no_load_voltage + self.volts_per_watt * p_exported
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConverterState {
    /// U* (V)
    pub dc_voltage: f64,
    /// 0..=15
    pub level_code: u8,
    pub connected: bool,
    pub trip_latched: bool,
}

impl Default for ConverterState {
    fn default() -> Self {
        Self { dc_voltage: 0.0, level_code: 0, connected: true, trip_latched: false }
    }
}

impl ConverterState {
    /// Opens the converter and latches the trip.
    pub fn trip(&mut self) {
        self.trip_latched = true;
        self.connected = false;
    }

    /// Operator reset. Returns `false`, leaving the state alone, if nothing was latched.
    pub fn reset(&mut self) -> bool {
        if !self.trip_latched {
            return false;
        }
        self.trip_latched = false;
        self.connected = true;
        true
    }

    /// Power actually delivered through the converter.
    pub fn exported(&self, p_available: f64) -> f64 {
        if self.connected && !self.trip_latched {
            p_available
        } else {
            0.0
        }
    }
}

/// U_max comparator: latches a trip when U* > U_max. Never clears a latch.
pub fn overvoltage_guard(state: ConverterState, u_max: f64) -> ConverterState {
    let mut next = state;
    if state.dc_voltage > u_max {
        next.trip();
    }
    next
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtectionLimits {
    /// Turbine-side rotor speed limit (rad/s).
    pub omega_max: f64,
    /// Applied drive torque limit (N·m).
    pub torque_max: f64,
    /// Aerodynamic power limit (W).
    pub power_max: f64,
    /// Whether a violation latches the converter trip.
    pub trip_on_violation: bool,
}

impl Default for ProtectionLimits {
    fn default() -> Self {
        Self { omega_max: 20.0, torque_max: 380.0, power_max: 5000.0, trip_on_violation: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OverSpeed { value: f64, limit: f64 },
    OverTorque { value: f64, limit: f64 },
    OverPower { value: f64, limit: f64 },
}

impl Violation {
    pub fn label(&self) -> &'static str {
        match self {
            Violation::OverSpeed { .. } => "over_speed",
            Violation::OverTorque { .. } => "over_torque",
            Violation::OverPower { .. } => "over_power",
        }
    }
}

/// Limit violations in the fixed order speed, torque, power.
pub fn protection_check(sample: &TelemetrySample, limits: &ProtectionLimits) -> Vec<Violation> {
    let mut out = Vec::new();
    if sample.omega > limits.omega_max {
        out.push(Violation::OverSpeed { value: sample.omega, limit: limits.omega_max });
    }
    if sample.t_applied.abs() > limits.torque_max {
        out.push(Violation::OverTorque { value: sample.t_applied, limit: limits.torque_max });
    }
    if sample.p_wt > limits.power_max {
        out.push(Violation::OverPower { value: sample.p_wt, limit: limits.power_max });
    }
    out
}
