//! Fixed-step bench executive.
//!
//! Every step runs the same sequence:
//!
//! 1. wind speed at the start of the step;
//! 2. torque reference for the active mode from the measured speed;
//! 3. drive response (delay, saturation, lag);
//! 4. generator load law, reflected through the gearbox;
//! 5. shaft integration over `dt`;
//! 6. electrical powers, DC bus, converter level, protections and trip;
//! 7. telemetry sample.

use serde::{Deserialize, Serialize};

use crate::drivetrain::{
    estimate_correction_inertia, reflect_to_generator, step_dynamics_with, total_inertia, DrivetrainParams, ShaftState,
};
use crate::mppt::MppLocus;
use crate::plant::{
    converter_level_command, generator_electrical_power, overvoltage_guard, protection_check, ConverterState,
    DrivePlant,
};
use crate::scenario::{
    check_setpoint, gust_offset, torque_reference, EventAction, LoadLaw, Mode, PiState, ReferenceParams, Scenario,
    WindField,
};
use crate::sim::command::{Command, CommandError};
use crate::sim::config::BenchConfig;
use crate::telemetry::TelemetrySample;
use crate::turbine::rad_s_to_rpm;
use crate::{Error, Result};

/// Snapshot of the mutable bench state.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub shaft: ShaftState,
    pub applied_torque: f64,
    pub converter: ConverterState,
    pub last_sample: TelemetrySample,
}

/// Energy totals over a run (J).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyAudit {
    /// ∫ T_applied·ω dt
    pub mechanical_in: f64,
    /// ∫ T_load·ω dt
    pub load: f64,
    /// ∫ P_wt dt
    pub aerodynamic: f64,
    /// ∫ P_est dt
    pub electrical: f64,
    /// ∫ P_exported dt
    pub exported: f64,
    pub kinetic_start: f64,
    pub kinetic_end: f64,
}

impl EnergyAudit {
    /// Relative mismatch of `mechanical_in = load + ΔE_kin`.
    pub fn shaft_residual(&self) -> f64 {
        let delta = self.kinetic_end - self.kinetic_start;
        (self.mechanical_in - self.load - delta) / self.mechanical_in.abs().max(f64::MIN_POSITIVE)
    }

    /// Relative mismatch of `mechanical_in = electrical/η + ΔE_kin`, η being the overall
    /// gearbox-times-conversion efficiency.
    pub fn conversion_residual(&self, eta: f64) -> f64 {
        let delta = self.kinetic_end - self.kinetic_start;
        (self.mechanical_in - self.electrical / eta - delta) / self.mechanical_in.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Copy, Debug)]
struct ActiveGust {
    t_start: f64,
    amplitude: f64,
    duration: f64,
}

/// The bench: every model plus the state they share, advanced one fixed step at a time.
#[derive(Clone, Debug)]
pub struct Bench {
    config: BenchConfig,
    drivetrain: DrivetrainParams,
    inertia: f64,
    scenario: Scenario,
    load_coefficient: f64,
    wind: WindField,
    wind_override: Option<f64>,
    gusts: Vec<ActiveGust>,
    mode: Mode,
    setpoint: Option<f64>,
    pi: PiState,
    shaft: ShaftState,
    drive: DrivePlant,
    converter: ConverterState,
    spike: Option<(f64, f64)>,
    events: Vec<(usize, crate::scenario::ScenarioEvent)>,
    next_event: usize,
    step_index: u64,
    last: TelemetrySample,
    energy: EnergyAudit,
}

impl Bench {
    pub fn new(config: &BenchConfig, scenario: &Scenario) -> Result<Self> {
        config.validate()?;
        scenario.validate()?;
        if scenario.dt > config.runtime.max_dt {
            return Err(Error::StepSize { dt: scenario.dt, max_dt: config.runtime.max_dt });
        }
        let mut drivetrain = config.drivetrain;
        if config.runtime.auto_correction {
            let est = estimate_correction_inertia(
                config.plant.drive.command_delay,
                &drivetrain,
                config.runtime.probe_torque,
                &config.correction,
            )?;
            drivetrain.j_correction = est.j_correction;
        }
        let inertia = total_inertia(&drivetrain)?;
        let locus = MppLocus::new(&config.turbine)?;
        let mut events: Vec<_> = scenario.events.iter().copied().enumerate().collect();
        events.sort_by(|a, b| a.1.at.total_cmp(&b.1.at).then(a.0.cmp(&b.0)));

        let mut bench = Self {
            config: config.clone(),
            drivetrain,
            inertia,
            scenario: scenario.clone(),
            load_coefficient: locus.load_coefficient(),
            wind: WindField::new(scenario.profile.clone()),
            wind_override: None,
            gusts: Vec::new(),
            mode: scenario.mode,
            setpoint: scenario.setpoint,
            pi: PiState::default(),
            shaft: ShaftState { omega: scenario.initial_omega, t: 0.0 },
            drive: DrivePlant::new(config.plant.drive)?,
            converter: ConverterState::default(),
            spike: None,
            events,
            next_event: 0,
            step_index: 0,
            last: TelemetrySample::default(),
            energy: EnergyAudit::default(),
        };
        let kinetic = bench.kinetic_energy(bench.shaft.omega);
        bench.energy.kinetic_start = kinetic;
        bench.energy.kinetic_end = kinetic;
        bench.last = bench.initial_sample().map_err(|e| Error::Step { index: 0, source: Box::new(e) })?;
        Ok(bench)
    }

    pub fn config(&self) -> &BenchConfig {
        &self.config
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Drivetrain parameters in use, including any estimated correction inertia.
    pub fn drivetrain(&self) -> &DrivetrainParams {
        &self.drivetrain
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn setpoint(&self) -> Option<f64> {
        self.setpoint
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.scenario.dt
    }

    pub fn last_sample(&self) -> &TelemetrySample {
        &self.last
    }

    pub fn energy(&self) -> &EnergyAudit {
        &self.energy
    }

    pub fn converter(&self) -> &ConverterState {
        &self.converter
    }

    pub fn state(&self) -> SimState {
        SimState {
            t: self.time(),
            shaft: self.shaft,
            applied_torque: self.drive.applied_torque(),
            converter: self.converter,
            last_sample: self.last.clone(),
        }
    }

    fn kinetic_energy(&self, omega: f64) -> f64 {
        0.5 * self.inertia * omega * omega
    }

    fn wind_speed(&mut self, t: f64) -> f64 {
        let base = match self.wind_override {
            Some(v) => v,
            None => self.wind.at(t),
        };
        let bump: f64 = self.gusts.iter().map(|g| gust_offset(t, g.amplitude, g.t_start, g.duration)).sum();
        (base + bump).max(0.0)
    }

    /// Turbine-side load torque of the generator at rotor speed `omega`.
    fn load_torque(&self, omega: f64, connected: bool) -> f64 {
        if !connected {
            return 0.0;
        }
        let w = omega.max(0.0);
        match self.scenario.load {
            LoadLaw::Mppt => self.load_coefficient * w * w,
            LoadLaw::Drag { coefficient } => coefficient * w,
            LoadLaw::Constant { torque } => {
                if w > 0.0 {
                    torque
                } else {
                    0.0
                }
            }
            LoadLaw::None => 0.0,
        }
    }

    fn electrical_power(&self, omega: f64, t_load: f64) -> f64 {
        let (omega_g, torque_g) = reflect_to_generator(omega, t_load, &self.drivetrain);
        generator_electrical_power(omega_g * torque_g, &self.config.plant.generator)
    }

    fn initial_sample(&mut self) -> Result<TelemetrySample> {
        let omega = self.shaft.omega;
        let v = self.wind_speed(0.0);
        let t_load = self.load_torque(omega, self.converter.connected);
        let p_est = self.electrical_power(omega, t_load);
        let p_exported = self.converter.exported(p_est);
        self.converter.dc_voltage = self.config.plant.dc_bus.voltage(p_exported);
        self.converter.level_code = converter_level_command(p_exported, self.config.plant.generator.rated_power);
        Ok(TelemetrySample {
            step: 0,
            t: 0.0,
            v,
            omega,
            n: rad_s_to_rpm(omega),
            lambda: if v > 0.0 { self.config.turbine.tip_speed_ratio(omega, v)? } else { 0.0 },
            t_ref: 0.0,
            t_applied: 0.0,
            t_load,
            p_wt: self.config.turbine.aerodynamic_power(v, omega)?,
            p_est,
            p_exported,
            u_star: self.converter.dc_voltage,
            level_code: self.converter.level_code,
            mode: self.mode,
            trip_latched: self.converter.trip_latched,
            violations: Vec::new(),
        })
    }

    fn apply_due_events(&mut self, t: f64) {
        while let Some(&(_, event)) = self.events.get(self.next_event) {
            if event.at > t + 1e-9 * self.scenario.dt {
                break;
            }
            self.next_event += 1;
            match event.action {
                EventAction::Trip => self.converter.trip(),
                EventAction::Reset => {
                    self.converter.reset();
                }
                EventAction::DcSpike { volts, duration } => self.spike = Some((volts, t + duration)),
                EventAction::SetWind { v } => self.wind_override = Some(v.max(0.0)),
                EventAction::Gust { amplitude, duration } => {
                    self.gusts.push(ActiveGust { t_start: t, amplitude, duration })
                }
            }
        }
    }

    /// Advances the bench by one step and returns the new sample.
    pub fn step(&mut self) -> Result<&TelemetrySample> {
        let index = self.step_index + 1;
        self.advance(index).map_err(|e| Error::Step { index, source: Box::new(e) })?;
        Ok(&self.last)
    }

    fn advance(&mut self, index: u64) -> Result<()> {
        let dt = self.scenario.dt;
        let t_start = self.time();
        let t_end = index as f64 * dt;
        self.apply_due_events(t_start);
        self.gusts.retain(|g| t_start <= g.t_start + g.duration);
        if matches!(self.spike, Some((_, until)) if t_start >= until) {
            self.spike = None;
        }
        let omega_start = self.shaft.omega;

        // (1)-(2)
        let v = self.wind_speed(t_start);
        let refs = ReferenceParams {
            turbine: &self.config.turbine,
            control: &self.config.control,
            torque_limit: self.config.plant.drive.torque_limit,
        };
        let t_ref = torque_reference(self.mode, omega_start, v, self.setpoint, &refs, &mut self.pi, dt)?;

        // (3)
        let t_applied = self.drive.respond(t_ref, dt);

        // (4)-(5)
        let connected = self.converter.connected && !self.converter.trip_latched;
        self.shaft = step_dynamics_with(
            self.shaft,
            t_applied,
            |w| self.load_torque(w, connected),
            &self.drivetrain,
            dt,
            self.config.runtime.max_dt,
        )?;
        self.shaft.t = t_end;
        let omega = self.shaft.omega;

        // (6)
        let t_load = self.load_torque(omega, connected);
        let p_est = self.electrical_power(omega, t_load);
        let p_wt = self.config.turbine.aerodynamic_power(v, omega)?;
        let spike = self.spike.map(|(volts, _)| volts).unwrap_or(0.0);
        let dc = &self.config.plant.dc_bus;
        self.converter.dc_voltage = dc.voltage(self.converter.exported(p_est)) + spike;
        self.converter = overvoltage_guard(self.converter, dc.u_max);

        let mut sample = TelemetrySample {
            step: index,
            t: t_end,
            v,
            omega,
            n: rad_s_to_rpm(omega),
            lambda: if v > 0.0 { self.config.turbine.tip_speed_ratio(omega, v)? } else { 0.0 },
            t_ref,
            t_applied,
            t_load,
            p_wt,
            p_est,
            p_exported: 0.0,
            u_star: self.converter.dc_voltage,
            level_code: 0,
            mode: self.mode,
            trip_latched: false,
            violations: Vec::new(),
        };
        sample.violations = protection_check(&sample, &self.config.protections);
        if !sample.violations.is_empty() && self.config.protections.trip_on_violation {
            self.converter.trip();
        }
        sample.p_exported = self.converter.exported(p_est);
        self.converter.level_code = converter_level_command(sample.p_exported, self.config.plant.generator.rated_power);
        sample.level_code = self.converter.level_code;
        sample.trip_latched = self.converter.trip_latched;

        // (7)
        let half = 0.5 * dt;
        let load_start = self.load_torque(omega_start, connected);
        let p_est_start = self.electrical_power(omega_start, load_start);
        let e = &mut self.energy;
        e.mechanical_in += t_applied * (omega_start + omega) * half;
        e.load += (load_start * omega_start + t_load * omega) * half;
        e.electrical += (p_est_start + p_est) * half;
        e.aerodynamic += p_wt * dt;
        e.exported += sample.p_exported * dt;
        e.kinetic_end = 0.5 * self.inertia * omega * omega;

        self.step_index = index;
        self.last = sample;
        Ok(())
    }

    /// Applies an operator command. Runs strictly between steps: the next step sees the change.
    ///
    /// Run control (`start`, `pause`, `status`, `load_scenario`) belongs to the session and is
    /// rejected here.
    pub fn apply(&mut self, command: &Command) -> std::result::Result<(), CommandError> {
        let name = command.name();
        match *command {
            Command::SetWind { v } => {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(CommandError::new(name, format!("wind speed must be non-negative, got {v}")));
                }
                self.wind_override = Some(v);
            }
            Command::InjectGust { amplitude, duration } => {
                if !(duration > 0.0 && amplitude.is_finite()) {
                    return Err(CommandError::new(name, "gust needs a finite amplitude and positive duration"));
                }
                self.gusts.push(ActiveGust { t_start: self.time(), amplitude, duration });
            }
            Command::SetMode { mode, setpoint } => {
                let setpoint = match (mode, setpoint) {
                    (Mode::TurbineEmulation, _) => None,
                    (_, Some(s)) => Some(s),
                    (_, None) if mode == self.mode => self.setpoint,
                    (_, None) => None,
                };
                check_setpoint(mode, setpoint).map_err(|e| CommandError::new(name, e.to_string()))?;
                if mode != self.mode {
                    self.pi = PiState::default();
                }
                self.mode = mode;
                self.setpoint = setpoint;
            }
            Command::SetSetpoint { value } => {
                if self.mode == Mode::TurbineEmulation {
                    return Err(CommandError::new(name, "turbine emulation takes no setpoint"));
                }
                if !value.is_finite() {
                    return Err(CommandError::new(name, "setpoint must be finite"));
                }
                self.setpoint = Some(value);
            }
            Command::Trip => self.converter.trip(),
            Command::TripReset => {
                if !self.converter.reset() {
                    return Err(CommandError::new(name, "no trip is latched"));
                }
            }
            Command::LoadScenario { .. } | Command::Start | Command::Pause | Command::Status => {
                return Err(CommandError::new(name, "run control is handled by the session"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ScenarioEvent, WindProfile};

    fn constant(v: f64, duration: f64) -> Scenario {
        Scenario::new(WindProfile::Constant { v0: v }, duration)
    }

    #[test]
    fn rest_is_an_equilibrium() {
        let cfg = BenchConfig::default();
        let mut bench = Bench::new(&cfg, &constant(0.0, 2.0)).unwrap();
        for _ in 0..2000 {
            let s = bench.step().unwrap().clone();
            assert_eq!(s.omega, 0.0);
            assert_eq!(s.p_wt, 0.0);
            assert!(s.violations.is_empty() && !s.trip_latched);
        }
    }

    #[test]
    fn time_advances_by_exact_steps() {
        let cfg = BenchConfig::default();
        let mut bench = Bench::new(&cfg, &constant(8.0, 1.0)).unwrap();
        for k in 1..=1000u64 {
            let s = bench.step().unwrap();
            assert_eq!(s.step, k);
            assert_eq!(s.t, k as f64 * 1e-3);
        }
        assert_eq!(bench.state().t, 1.0);
    }

    #[test]
    fn set_wind_takes_effect_on_next_step() {
        let cfg = BenchConfig::default();
        let mut bench = Bench::new(&cfg, &constant(8.0, 10.0)).unwrap();
        for _ in 0..10 {
            bench.step().unwrap();
        }
        bench.apply(&Command::SetWind { v: 11.0 }).unwrap();
        assert_eq!(bench.step().unwrap().v, 11.0);
        assert!(bench.apply(&Command::SetWind { v: -1.0 }).is_err());
        assert_eq!(bench.step().unwrap().v, 11.0);
    }

    #[test]
    fn trip_zeroes_export_until_reset() {
        let cfg = BenchConfig::default();
        let mut bench = Bench::new(&cfg, &constant(8.0, 10.0)).unwrap();
        for _ in 0..5000 {
            bench.step().unwrap();
        }
        assert!(bench.last_sample().p_exported > 0.0);
        assert!(bench.apply(&Command::TripReset).is_err());
        bench.apply(&Command::Trip).unwrap();
        for _ in 0..3000 {
            let s = bench.step().unwrap();
            assert!(s.trip_latched);
            assert_eq!(s.p_exported, 0.0);
        }
        bench.apply(&Command::TripReset).unwrap();
        let mut restored = false;
        for _ in 0..3000 {
            let s = bench.step().unwrap();
            restored |= s.p_exported > 0.0;
        }
        assert!(restored);
    }

    #[test]
    fn mode_commands() {
        let cfg = BenchConfig::default();
        let mut bench = Bench::new(&cfg, &constant(8.0, 10.0)).unwrap();
        assert!(bench.apply(&Command::SetMode { mode: Mode::SpeedControl, setpoint: None }).is_err());
        assert_eq!(bench.mode(), Mode::TurbineEmulation);
        bench.apply(&Command::SetMode { mode: Mode::SpeedControl, setpoint: Some(5.0) }).unwrap();
        bench.apply(&Command::SetSetpoint { value: 6.0 }).unwrap();
        assert_eq!(bench.setpoint(), Some(6.0));
        bench.apply(&Command::SetMode { mode: Mode::TurbineEmulation, setpoint: Some(1.0) }).unwrap();
        assert_eq!(bench.setpoint(), None);
        assert!(bench.apply(&Command::SetSetpoint { value: 1.0 }).is_err());
        assert!(bench.apply(&Command::Start).is_err());
    }

    #[test]
    fn spike_event_trips_in_same_step() {
        let cfg = BenchConfig::default();
        let scenario = Scenario {
            events: vec![ScenarioEvent { at: 1.0, action: EventAction::DcSpike { volts: 200.0, duration: 0.01 } }],
            ..constant(8.0, 2.0)
        };
        let mut bench = Bench::new(&cfg, &scenario).unwrap();
        let mut first_over = None;
        let mut first_trip = None;
        for _ in 0..2000 {
            let s = bench.step().unwrap().clone();
            if s.u_star > cfg.plant.dc_bus.u_max && first_over.is_none() {
                first_over = Some(s.step);
            }
            if s.trip_latched && first_trip.is_none() {
                first_trip = Some(s.step);
            }
        }
        assert_eq!(first_over, first_trip);
        assert_eq!(first_trip, Some(1001));
    }

    #[test]
    fn oversize_step_is_rejected() {
        let cfg = BenchConfig::default();
        let s = Scenario { dt: 0.05, ..constant(8.0, 1.0) };
        assert!(matches!(Bench::new(&cfg, &s), Err(Error::StepSize { .. })));
    }

    #[test]
    fn auto_correction_sets_negative_inertia() {
        let mut cfg = BenchConfig::default();
        cfg.runtime.auto_correction = true;
        cfg.correction.horizon = 0.2;
        cfg.correction.dt = 5e-4;
        let bench = Bench::new(&cfg, &constant(8.0, 1.0)).unwrap();
        let jc = bench.drivetrain().j_correction;
        assert!(jc < 0.0 && jc > -cfg.drivetrain.physical_inertia(), "{jc}");
    }
}
