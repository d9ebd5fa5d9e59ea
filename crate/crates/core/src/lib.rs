//! Software laboratory bench for a small fixed-pitch wind energy conversion system.
//!
//! The crate is organised along the signal chain of the physical stand:
//!
//! - [`turbine`]: static aerodynamic model (power coefficient, tip-speed ratio, power and torque).
//! - [`mppt`]: optimal tip-speed ratio, maximum-power locus, reference table and parameter identification.
//! - [`drivetrain`]: gearbox reflection, aggregate inertia, rotational dynamics and correction inertia.
//! - [`plant`]: torque-controlled drive, generator efficiency map and the converter block with protections.
//! - [`scenario`]: wind profiles, operating modes and torque references.
//! - [`sim`]: the fixed-step bench executive, configuration, logs and reports.
//!
//! Batch work (sweeps, curves, locus evaluation, scenario batches) goes through [`exec::Execution`],
//! which runs on rayon when the `parallel` feature is enabled and sequentially otherwise.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drivetrain;
pub mod error;
pub mod exec;
pub mod mppt;
pub mod plant;
pub mod reference;
pub mod scenario;
pub mod sim;
pub mod telemetry;
pub mod turbine;

pub use error::{Error, Result};
pub use exec::Execution;
