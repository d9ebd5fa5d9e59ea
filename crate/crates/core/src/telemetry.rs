//! Per-step snapshot of the bench and its CSV log format.

use serde::{Deserialize, Serialize};

use crate::plant::Violation;
use crate::scenario::Mode;
use crate::Result;

/// Everything observed during one simulation step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TelemetrySample {
    pub step: u64,
    /// s
    pub t: f64,
    /// Wind speed (m/s).
    pub v: f64,
    /// Turbine-side rotor speed (rad/s).
    pub omega: f64,
    /// Rotor speed (rpm).
    pub n: f64,
    pub lambda: f64,
    /// Torque reference sent to the drive (N·m).
    pub t_ref: f64,
    /// Torque actually applied by the drive (N·m).
    pub t_applied: f64,
    /// Generator load torque seen on the turbine side (N·m).
    pub t_load: f64,
    /// Aerodynamic power of the emulated rotor (W).
    pub p_wt: f64,
    /// Electrical power produced by the generator (W).
    pub p_est: f64,
    /// Power delivered through the network converter (W).
    pub p_exported: f64,
    /// DC-bus voltage (V).
    pub u_star: f64,
    pub level_code: u8,
    pub mode: Mode,
    pub trip_latched: bool,
    pub violations: Vec<Violation>,
}

pub const CSV_HEADER: [&str; 17] = [
    "step",
    "t",
    "v",
    "omega",
    "n",
    "lambda",
    "t_ref",
    "t_applied",
    "t_load",
    "p_wt",
    "p_est",
    "p_exported",
    "u_star",
    "level_code",
    "mode",
    "trip_latched",
    "violations",
];

impl TelemetrySample {
    fn csv_record(&self) -> [String; 17] {
        let violations: Vec<&str> = self.violations.iter().map(Violation::label).collect();
        [
            self.step.to_string(),
            self.t.to_string(),
            self.v.to_string(),
            self.omega.to_string(),
            self.n.to_string(),
            self.lambda.to_string(),
            self.t_ref.to_string(),
            self.t_applied.to_string(),
            self.t_load.to_string(),
            self.p_wt.to_string(),
            self.p_est.to_string(),
            self.p_exported.to_string(),
            self.u_star.to_string(),
            self.level_code.to_string(),
            self.mode.as_str().to_string(),
            self.trip_latched.to_string(),
            violations.join("|"),
        ]
    }
}

/// Streaming CSV writer for telemetry logs.
pub struct CsvLog<W: std::io::Write> {
    inner: csv::Writer<W>,
}

impl<W: std::io::Write> CsvLog<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(CSV_HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, sample: &TelemetrySample) -> Result<()> {
        self.inner.write_record(sample.csv_record())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| crate::Error::Io(e.to_string()))
    }
}

pub fn write_csv<W: std::io::Write>(samples: &[TelemetrySample], out: W) -> Result<W> {
    let mut log = CsvLog::new(out)?;
    for s in samples {
        log.write(s)?;
    }
    log.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row_shape() {
        let s = TelemetrySample {
            violations: vec![
                Violation::OverSpeed { value: 1.0, limit: 0.5 },
                Violation::OverPower { value: 2.0, limit: 1.0 },
            ],
            ..Default::default()
        };
        let bytes = write_csv(&[s.clone(), s], Vec::new()).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), CSV_HEADER.len());
        assert!(row.ends_with("turbine_emulation,false,over_speed|over_power"));
        assert_eq!(text.lines().count(), 3);
    }
}
