//! Static aerodynamic model of a fixed-pitch rotor.
//!
//! ```text
//! P  = ½ · ρ · πR² · Cp(λ) · v³
//! Cp = a·λ + b·λ² − c·λ^3.5      (clamped to 0 outside [0, λ_cutoff) and where negative)
//! λ  = ω·R / v
//! T  = P / ω
//! ```
//!
//! Everything here is SI. Rotor speed in rpm only appears in [`OperatingPoint::rotor_rpm`].

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::{Error, Result};

/// Geometry, air density and power-coefficient coefficients of the turbine.
///
/// The defaults reproduce the bench's reference table: R = 2.5 m and ρ = 1.225 kg/m³
/// with `cp_c` applied with a negative sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineParams {
    /// Blade length R (m).
    pub rotor_radius: f64,
    /// ρ (kg/m³).
    pub air_density: f64,
    pub cp_a: f64,
    pub cp_b: f64,
    /// Magnitude of the λ^3.5 coefficient. The term is subtracted.
    pub cp_c: f64,
    /// Cp is zero for λ at or above this bound.
    pub lambda_cutoff: f64,
    /// Floor (rad/s) below which P/ω is not evaluated.
    pub omega_min: f64,
}

impl Default for TurbineParams {
    fn default() -> Self {
        Self {
            rotor_radius: 2.5,
            air_density: 1.225,
            cp_a: 0.00888,
            cp_b: 0.03944,
            cp_c: 0.00452,
            lambda_cutoff: 4.4,
            omega_min: 0.1,
        }
    }
}

impl TurbineParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rotor_radius", self.rotor_radius),
            ("air_density", self.air_density),
            ("cp_a", self.cp_a),
            ("cp_b", self.cp_b),
            ("cp_c", self.cp_c),
            ("lambda_cutoff", self.lambda_cutoff),
            ("omega_min", self.omega_min),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(format!("turbine.{name} must be positive and finite, got {value}")));
            }
        }
        Ok(())
    }

    /// Swept area πR² (m²).
    pub fn swept_area(&self) -> f64 {
        std::f64::consts::PI * self.rotor_radius * self.rotor_radius
    }

    /// Raw polynomial a·λ + b·λ² − c·λ^3.5 without any clamping.
    pub fn cp_polynomial(&self, lambda: f64) -> f64 {
        self.cp_a * lambda + self.cp_b * lambda * lambda - self.cp_c * lambda.powf(3.5)
    }

    fn in_active_band(&self, lambda: f64) -> bool {
        lambda < self.lambda_cutoff && self.cp_polynomial(lambda) > 0.0
    }

    /// Power coefficient Cp(λ), clamped to zero above `lambda_cutoff` or where the
    /// polynomial is negative.
    pub fn power_coefficient(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::domain(format!("tip-speed ratio must be non-negative, got {lambda}")));
        }
        if lambda == 0.0 || !self.in_active_band(lambda) {
            return Ok(0.0);
        }
        Ok(self.cp_polynomial(lambda))
    }

    /// dCp/dλ of the clamped curve (zero in the clamped region).
    pub fn power_coefficient_slope(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::domain(format!("tip-speed ratio must be non-negative, got {lambda}")));
        }
        if lambda > 0.0 && !self.in_active_band(lambda) {
            return Ok(0.0);
        }
        Ok(self.cp_a + 2.0 * self.cp_b * lambda - 3.5 * self.cp_c * lambda.powf(2.5))
    }

    /// Tip-speed ratio ω·R/v.
    pub fn tip_speed_ratio(&self, omega: f64, wind_speed: f64) -> Result<f64> {
        if !(wind_speed > 0.0) {
            return Err(Error::domain(format!("wind speed must be positive, got {wind_speed}")));
        }
        if !(omega >= 0.0) {
            return Err(Error::domain(format!("rotor speed must be non-negative, got {omega}")));
        }
        Ok(omega * self.rotor_radius / wind_speed)
    }

    /// Aerodynamic power (W) captured at wind speed `wind_speed` and rotor speed `omega`.
    pub fn aerodynamic_power(&self, wind_speed: f64, omega: f64) -> Result<f64> {
        if !(wind_speed >= 0.0) {
            return Err(Error::domain(format!("wind speed must be non-negative, got {wind_speed}")));
        }
        if !(omega >= 0.0) {
            return Err(Error::domain(format!("rotor speed must be non-negative, got {omega}")));
        }
        if wind_speed == 0.0 {
            return Ok(0.0);
        }
        let cp = self.power_coefficient(self.tip_speed_ratio(omega, wind_speed)?)?;
        Ok(0.5 * self.swept_area() * self.air_density * cp * wind_speed.powi(3))
    }

    /// Aerodynamic torque P/ω (N·m). Fails below `omega_min`.
    pub fn aerodynamic_torque(&self, wind_speed: f64, omega: f64) -> Result<f64> {
        if !(omega >= self.omega_min) {
            return Err(Error::LowSpeed { omega, omega_min: self.omega_min });
        }
        Ok(self.aerodynamic_power(wind_speed, omega)? / omega)
    }

    /// Torque via the torque coefficient Cp(λ)/λ, which stays finite as ω → 0.
    ///
    /// Matches [`aerodynamic_torque`](Self::aerodynamic_torque) wherever that is defined,
    /// up to rounding.
    pub fn torque_from_coefficient(&self, wind_speed: f64, omega: f64) -> Result<f64> {
        if wind_speed == 0.0 {
            return Ok(0.0);
        }
        let lambda = self.tip_speed_ratio(omega, wind_speed)?;
        let ct = if lambda == 0.0 { self.cp_a } else { self.power_coefficient(lambda)? / lambda };
        Ok(0.5 * self.air_density * self.swept_area() * self.rotor_radius * ct * wind_speed * wind_speed)
    }

    /// Operating point at (v, ω). Torque below `omega_min` uses the torque-coefficient limit.
    pub fn operating_point(&self, wind_speed: f64, omega: f64) -> Result<OperatingPoint> {
        let tsr = self.tip_speed_ratio(omega, wind_speed)?;
        let power = self.aerodynamic_power(wind_speed, omega)?;
        let torque =
            if omega >= self.omega_min { power / omega } else { self.torque_from_coefficient(wind_speed, omega)? };
        Ok(OperatingPoint { wind_speed, rotor_speed: omega, tsr, power, torque, rotor_rpm: rad_s_to_rpm(omega) })
    }

    /// Power characteristic at one wind speed over a rotor-speed grid.
    pub fn power_curve(&self, wind_speed: f64, omega_grid: &[f64]) -> Result<Vec<OperatingPoint>> {
        self.power_curve_with(Execution::default(), wind_speed, omega_grid)
    }

    pub fn power_curve_with(
        &self,
        exec: Execution,
        wind_speed: f64,
        omega_grid: &[f64],
    ) -> Result<Vec<OperatingPoint>> {
        if omega_grid.is_empty() {
            return Err(Error::domain("rotor-speed grid is empty"));
        }
        if omega_grid[0] < 0.0 || omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("rotor-speed grid must be non-negative and strictly increasing"));
        }
        exec.map(omega_grid, |&omega| self.operating_point(wind_speed, omega)).into_iter().collect()
    }

    /// Family of power curves, one per wind speed.
    pub fn power_curves(&self, wind_speeds: &[f64], omega_grid: &[f64]) -> Result<Vec<Vec<OperatingPoint>>> {
        Execution::default()
            .map(wind_speeds, |&v| self.power_curve_with(Execution::Sequential, v, omega_grid))
            .into_iter()
            .collect()
    }
}

/// A single (v, ω) evaluation of the rotor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// m/s
    pub wind_speed: f64,
    /// rad/s
    pub rotor_speed: f64,
    pub tsr: f64,
    /// W
    pub power: f64,
    /// N·m
    pub torque: f64,
    /// rev/min
    pub rotor_rpm: f64,
}

pub fn rad_s_to_rpm(omega: f64) -> f64 {
    omega * 60.0 / (2.0 * std::f64::consts::PI)
}

/// Writes curve rows as CSV with columns `v,omega,lambda,cp,power_w,torque_nm`.
pub fn write_curve_csv<W: std::io::Write>(params: &TurbineParams, rows: &[OperatingPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["v", "omega", "lambda", "cp", "power_w", "torque_nm"])?;
    for p in rows {
        let cp = params.power_coefficient(p.tsr)?;
        w.write_record([
            p.wind_speed.to_string(),
            p.rotor_speed.to_string(),
            p.tsr.to_string(),
            cp.to_string(),
            p.power.to_string(),
            p.torque.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
