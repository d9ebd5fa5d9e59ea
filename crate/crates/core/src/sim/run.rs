//! Headless scenario runs.

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::scenario::Scenario;
use crate::sim::bench::{Bench, EnergyAudit};
use crate::sim::config::BenchConfig;
use crate::telemetry::TelemetrySample;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    pub duration: f64,
    pub dt: f64,
    pub final_sample: TelemetrySample,
    pub energy: EnergyAudit,
    /// Relative error of mechanical input = electrical/η + ΔE_kin.
    pub conservation_residual: f64,
    /// Exported over aerodynamic energy.
    pub mean_efficiency: f64,
    pub trip_steps: u64,
    pub violation_steps: u64,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    /// Initial sample followed by one sample per step.
    pub samples: Vec<TelemetrySample>,
    pub summary: RunSummary,
}

impl RunLog {
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        crate::telemetry::write_csv(&self.samples, Vec::new())
    }
}

/// Runs a scenario to completion, handing every sample (initial one included) to `sink`.
pub fn run_scenario_streaming<F>(scenario: &Scenario, config: &BenchConfig, mut sink: F) -> Result<RunSummary>
where
    F: FnMut(&TelemetrySample) -> Result<()>,
{
    let mut bench = Bench::new(config, scenario)?;
    sink(bench.last_sample())?;
    let steps = scenario.steps();
    let (mut trip_steps, mut violation_steps) = (0, 0);
    for _ in 0..steps {
        let sample = bench.step()?;
        trip_steps += u64::from(sample.trip_latched);
        violation_steps += u64::from(!sample.violations.is_empty());
        sink(sample)?;
    }
    let energy = *bench.energy();
    let eta = config.plant.generator.eta_conv * bench.drivetrain().gearbox_efficiency;
    Ok(RunSummary {
        steps,
        duration: scenario.duration,
        dt: scenario.dt,
        final_sample: bench.last_sample().clone(),
        energy,
        conservation_residual: energy.conversion_residual(eta),
        mean_efficiency: if energy.aerodynamic > 0.0 { energy.exported / energy.aerodynamic } else { 0.0 },
        trip_steps,
        violation_steps,
    })
}

pub fn run_scenario(scenario: &Scenario, config: &BenchConfig) -> Result<RunLog> {
    let mut samples = Vec::with_capacity(scenario.steps() as usize + 1);
    let summary = run_scenario_streaming(scenario, config, |s| {
        samples.push(s.clone());
        Ok(())
    })?;
    Ok(RunLog { samples, summary })
}

/// Runs independent scenarios, returning only their summaries.
pub fn run_batch(scenarios: &[Scenario], config: &BenchConfig) -> Vec<Result<RunSummary>> {
    run_batch_with(Execution::default(), scenarios, config)
}

pub fn run_batch_with(exec: Execution, scenarios: &[Scenario], config: &BenchConfig) -> Vec<Result<RunSummary>> {
    exec.map(scenarios, |s| run_scenario_streaming(s, config, |_| Ok(())))
}
