//! The bench executive: configuration, fixed-step loop, runs, live sessions and reports.

pub mod bench;
pub mod command;
pub mod config;
pub mod report;
pub mod run;
pub mod session;

pub use bench::{Bench, EnergyAudit, SimState};
pub use command::{Command, CommandError};
pub use config::BenchConfig;
pub use report::{compare_with_measurements, report_table};
pub use run::{run_batch, run_scenario, run_scenario_streaming, RunLog, RunSummary};
pub use session::{BenchEvent, Session, StatusReport, StepOutcome};
