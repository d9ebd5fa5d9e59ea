//! Measured reference data of the physical stand, carried for comparison reports.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    /// m/s
    pub wind_speed: f64,
    /// Optimal aerodynamic power (W).
    pub p_wt: f64,
    /// Optimal rotor speed (rad/s).
    pub omega: f64,
    pub rpm: f64,
    /// Estimated electrical power (W).
    pub p_est: f64,
    /// Power measured at the grid connection (W). Not reproduced by the model.
    pub p_gen: f64,
}

const fn row(wind_speed: f64, p_wt: f64, omega: f64, rpm: f64, p_est: f64, p_gen: f64) -> ReferenceRow {
    ReferenceRow { wind_speed, p_wt, omega, rpm, p_est, p_gen }
}

/// Maximum-power experiment of the reference rig, 4 to 12 m/s.
pub const REFERENCE_TABLE: [ReferenceRow; 9] = [
    row(4.0, 131.02, 4.79, 45.76, 104.81, 69.56),
    row(5.0, 255.90, 5.98, 57.13, 204.72, 135.86),
    row(6.0, 442.19, 7.18, 68.60, 353.75, 290.87),
    row(7.0, 702.19, 8.37, 79.97, 561.75, 523.52),
    row(8.0, 1048.16, 9.57, 91.43, 838.52, 839.50),
    row(9.0, 1492.40, 10.77, 102.90, 1193.92, 1260.82),
    row(10.0, 2047.19, 11.96, 114.27, 1637.75, 1682.85),
    row(11.0, 2724.82, 13.16, 125.73, 2179.85, 2239.88),
    row(12.0, 3537.55, 14.36, 137.20, 2830.04, 2907.97),
];

pub fn lookup(wind_speed: f64) -> Option<&'static ReferenceRow> {
    REFERENCE_TABLE.iter().find(|r| (r.wind_speed - wind_speed).abs() < 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimated_over_optimal_is_constant() {
        for r in &REFERENCE_TABLE {
            assert!((r.p_est / r.p_wt - 0.8).abs() < 1e-3, "{r:?}");
        }
    }

    #[test]
    fn measured_exceeds_estimate_from_8_ms() {
        for r in &REFERENCE_TABLE {
            assert_eq!(r.p_gen > r.p_est, r.wind_speed >= 8.0, "{r:?}");
        }
        assert!(lookup(6.0).is_some() && lookup(6.5).is_none());
    }
}
