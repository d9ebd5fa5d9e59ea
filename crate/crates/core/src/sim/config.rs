//! Bench configuration file (TOML).
//!
//! ```toml
//! [turbine]        # TurbineParams
//! [drivetrain]     # DrivetrainParams
//! [plant.drive]    # DriveParams
//! [plant.generator]
//! [plant.dc_bus]
//! [protections]
//! [control]
//! [correction]     # CorrectionSweep
//! [runtime]
//! [scenarios.<name>]
//! ```
//!
//! Every section and field is optional; missing values take the defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drivetrain::{CorrectionSweep, DrivetrainParams};
use crate::plant::{DcBusModel, DriveParams, GeneratorModel, ProtectionLimits};
use crate::scenario::{ControlParams, EventAction, LoadLaw, Mode, Scenario, ScenarioEvent, WindProfile};
use crate::turbine::TurbineParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    pub drive: DriveParams,
    pub generator: GeneratorModel,
    pub dc_bus: DcBusModel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuntimeConfig {
    /// Largest accepted integration step (s).
    pub max_dt: f64,
    /// Telemetry streaming rate (Hz of simulated time). Disk logs are always full rate.
    pub telemetry_hz: f64,
    /// Pace the live loop against the wall clock.
    pub realtime: bool,
    /// Simulated seconds per wall-clock second when pacing.
    pub speed: f64,
    /// Estimate J_c from the drive command delay when a bench is built.
    pub auto_correction: bool,
    /// Probe torque for the automatic J_c estimate (N·m).
    pub probe_torque: f64,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            max_dt: 0.01,
            telemetry_hz: 50.0,
            realtime: false,
            speed: 1.0,
            auto_correction: false,
            probe_torque: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub turbine: TurbineParams,
    pub drivetrain: DrivetrainParams,
    pub plant: PlantConfig,
    pub protections: ProtectionLimits,
    pub control: ControlParams,
    pub correction: CorrectionSweep,
    pub runtime: RuntimeConfig,
    pub scenarios: BTreeMap<String, Scenario>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            turbine: TurbineParams::default(),
            drivetrain: DrivetrainParams::default(),
            plant: PlantConfig::default(),
            protections: ProtectionLimits::default(),
            control: ControlParams::default(),
            correction: CorrectionSweep::default(),
            runtime: RuntimeConfig::default(),
            scenarios: builtin_scenarios(),
        }
    }
}

impl BenchConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.turbine.validate()?;
        self.drivetrain.validate()?;
        self.plant.drive.validate()?;
        self.plant.generator.validate()?;
        self.plant.dc_bus.validate()?;
        self.correction.validate()?;
        let rt = &self.runtime;
        if !(rt.max_dt > 0.0 && rt.telemetry_hz > 0.0 && rt.speed > 0.0) {
            return Err(Error::config("runtime max_dt, telemetry_hz and speed must be positive"));
        }
        for (name, s) in &self.scenarios {
            s.validate().map_err(|e| Error::config(format!("scenario '{name}': {e}")))?;
        }
        Ok(())
    }

    pub fn scenario(&self, name: &str) -> Result<&Scenario> {
        self.scenarios.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.scenarios.keys().map(String::as_str).collect();
            Error::config(format!("unknown scenario '{name}' (known: {})", known.join(", ")))
        })
    }
}

/// Scenarios available without a config file.
pub fn builtin_scenarios() -> BTreeMap<String, Scenario> {
    let mut out = BTreeMap::new();
    for v in [4u32, 8, 12] {
        out.insert(format!("mpp-{v}"), Scenario::new(WindProfile::Constant { v0: f64::from(v) }, 60.0));
    }
    out.insert("step-4-12".into(), Scenario::new(WindProfile::Step { v0: 4.0, v1: 12.0, t_step: 20.0 }, 80.0));
    out.insert(
        "gust".into(),
        Scenario::new(WindProfile::Gust { v_base: 8.0, amplitude: 4.0, t_start: 10.0, duration: 6.0 }, 30.0),
    );
    out.insert(
        "turbulent".into(),
        Scenario::new(WindProfile::Turbulent { v_base: 8.0, intensity: 0.12, seed: 2024, time_scale: 10.0 }, 120.0),
    );
    out.insert(
        "speed-control".into(),
        Scenario {
            mode: Mode::SpeedControl,
            setpoint: Some(9.57),
            ..Scenario::new(WindProfile::Constant { v0: 8.0 }, 60.0)
        },
    );
    out.insert(
        "torque-control".into(),
        Scenario {
            mode: Mode::TorqueControl,
            setpoint: Some(60.0),
            load: LoadLaw::Drag { coefficient: 6.0 },
            ..Scenario::new(WindProfile::Constant { v0: 8.0 }, 20.0)
        },
    );
    out.insert(
        "trip-demo".into(),
        Scenario {
            events: vec![
                ScenarioEvent { at: 20.0, action: EventAction::DcSpike { volts: 150.0, duration: 0.05 } },
                ScenarioEvent { at: 25.0, action: EventAction::Reset },
            ],
            ..Scenario::new(WindProfile::Constant { v0: 8.0 }, 40.0)
        },
    );
    out
}
