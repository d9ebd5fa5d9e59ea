//! Live run control: the state machine behind the operator protocol.
//!
//! A [`Session`] owns one [`Bench`] and is the only place where it is mutated. Commands are
//! applied with [`Session::handle`] and steps are taken with [`Session::step`]; the caller
//! interleaves the two, so a command always lands between two steps.

use serde::{Deserialize, Serialize};

use crate::plant::Violation;
use crate::scenario::Mode;
use crate::sim::bench::Bench;
use crate::sim::command::{Command, CommandError};
use crate::sim::config::BenchConfig;
use crate::telemetry::TelemetrySample;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatusReport {
    pub running: bool,
    pub scenario: String,
    pub step: u64,
    pub t: f64,
    pub mode: Mode,
    pub setpoint: Option<f64>,
    pub trip_latched: bool,
    pub sample: TelemetrySample,
}

/// Discrete occurrences worth pushing to operators immediately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum BenchEvent {
    Trip { step: u64, t: f64, u_star: f64 },
    Reset { step: u64, t: f64 },
    Violation { step: u64, t: f64, violations: Vec<Violation> },
}

/// Outcome of one live step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub sample: TelemetrySample,
    /// Whether this sample is due on the decimated telemetry stream.
    pub broadcast: bool,
    pub events: Vec<BenchEvent>,
}

pub struct Session {
    config: BenchConfig,
    scenario: String,
    bench: Bench,
    running: bool,
    decimation: u64,
    last_violations: Vec<&'static str>,
}

fn decimation(config: &BenchConfig, dt: f64) -> u64 {
    ((1.0 / (config.runtime.telemetry_hz * dt)).round() as u64).max(1)
}

impl Session {
    pub fn new(config: BenchConfig, scenario: &str) -> Result<Self> {
        let bench = Bench::new(&config, config.scenario(scenario)?)?;
        let decimation = decimation(&config, bench.scenario().dt);
        Ok(Self {
            config,
            scenario: scenario.to_owned(),
            bench,
            running: false,
            decimation,
            last_violations: Vec::new(),
        })
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    pub fn bench(&self) -> &Bench {
        &self.bench
    }

    pub fn dt(&self) -> f64 {
        self.bench.scenario().dt
    }

    pub fn decimation(&self) -> u64 {
        self.decimation
    }

    pub fn status(&self) -> StatusReport {
        StatusReport {
            running: self.running,
            scenario: self.scenario.clone(),
            step: self.bench.step_index(),
            t: self.bench.time(),
            mode: self.bench.mode(),
            setpoint: self.bench.setpoint(),
            trip_latched: self.bench.converter().trip_latched,
            sample: self.bench.last_sample().clone(),
        }
    }

    /// Applies a command and returns the resulting status, plus any event it caused.
    /// A rejected command leaves the session untouched.
    pub fn handle(&mut self, command: &Command) -> std::result::Result<(StatusReport, Vec<BenchEvent>), CommandError> {
        let mut events = Vec::new();
        match command {
            Command::Start => self.running = true,
            Command::Pause => self.running = false,
            Command::Status => {}
            Command::LoadScenario { name } => {
                let err = |e: crate::Error| CommandError::new(command.name(), e.to_string());
                let scenario = self.config.scenario(name).map_err(err)?;
                let bench = Bench::new(&self.config, scenario).map_err(err)?;
                self.decimation = decimation(&self.config, bench.scenario().dt);
                self.bench = bench;
                self.scenario = name.clone();
                self.running = false;
                self.last_violations.clear();
            }
            other => {
                let was_tripped = self.bench.converter().trip_latched;
                self.bench.apply(other)?;
                let now_tripped = self.bench.converter().trip_latched;
                let (step, t) = (self.bench.step_index(), self.bench.time());
                if now_tripped && !was_tripped {
                    events.push(BenchEvent::Trip { step, t, u_star: self.bench.converter().dc_voltage });
                } else if was_tripped && !now_tripped {
                    events.push(BenchEvent::Reset { step, t });
                }
            }
        }
        Ok((self.status(), events))
    }

    /// Advances one step regardless of the running flag.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let was_tripped = self.bench.converter().trip_latched;
        let sample = self.bench.step()?.clone();
        let mut events = Vec::new();
        if sample.trip_latched && !was_tripped {
            events.push(BenchEvent::Trip { step: sample.step, t: sample.t, u_star: sample.u_star });
        } else if was_tripped && !sample.trip_latched {
            events.push(BenchEvent::Reset { step: sample.step, t: sample.t });
        }
        let labels: Vec<&'static str> = sample.violations.iter().map(Violation::label).collect();
        if !labels.is_empty() && labels != self.last_violations {
            events.push(BenchEvent::Violation {
                step: sample.step,
                t: sample.t,
                violations: sample.violations.clone(),
            });
        }
        self.last_violations = labels;
        let broadcast = sample.step % self.decimation == 0 || !events.is_empty();
        Ok(StepOutcome { sample, broadcast, events })
    }
}
