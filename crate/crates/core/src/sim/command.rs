//! Runtime commands accepted by the bench between steps.

use serde::{Deserialize, Serialize};

use crate::scenario::Mode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    LoadScenario {
        name: String,
    },
    Start,
    Pause,
    /// Replace the wind by a constant speed (m/s).
    SetWind {
        v: f64,
    },
    /// Superimpose a half-cosine gust starting at the next step.
    InjectGust {
        amplitude: f64,
        duration: f64,
    },
    SetMode {
        mode: Mode,
        #[serde(default)]
        setpoint: Option<f64>,
    },
    SetSetpoint {
        value: f64,
    },
    /// Operator trip of the converter.
    Trip,
    /// Clear a latched trip. Rejected when nothing is latched.
    TripReset,
    Status,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::LoadScenario { .. } => "load_scenario",
            Command::Start => "start",
            Command::Pause => "pause",
            Command::SetWind { .. } => "set_wind",
            Command::InjectGust { .. } => "inject_gust",
            Command::SetMode { .. } => "set_mode",
            Command::SetSetpoint { .. } => "set_setpoint",
            Command::Trip => "trip",
            Command::TripReset => "trip_reset",
            Command::Status => "status",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{command}: {reason}")]
pub struct CommandError {
    pub command: &'static str,
    pub reason: String,
}

impl CommandError {
    pub fn new(command: &'static str, reason: impl Into<String>) -> Self {
        Self { command, reason: reason.into() }
    }
}
