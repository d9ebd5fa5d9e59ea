//! Single-mass drivetrain: gearbox reflection, aggregate inertia and shaft dynamics.
//!
//! All inertias are lumped on the turbine side. The shaft obeys
//!
//! ```text
//! J · dω/dt = T − T_load,     J = J_motor + J_gearbox + J_generator + J_c
//! ```
//!
//! and generator-side speed and torque are obtained by reflection through the gear ratio.

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrivetrainParams {
    /// Generator speed over turbine speed; 1 is direct drive.
    pub gear_ratio: f64,
    /// In (0, 1].
    pub gearbox_efficiency: f64,
    /// kg·m²
    pub j_motor: f64,
    pub j_gearbox: f64,
    pub j_generator: f64,
    /// Correction inertia compensating loop delay. May be negative.
    pub j_correction: f64,
}

impl Default for DrivetrainParams {
    fn default() -> Self {
        // Placeholder inertias for a bench of this size; nothing authoritative.
        Self {
            gear_ratio: 1.0,
            gearbox_efficiency: 1.0,
            j_motor: 0.05,
            j_gearbox: 0.01,
            j_generator: 0.03,
            j_correction: 0.0,
        }
    }
}

impl DrivetrainParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gear_ratio > 0.0 && self.gear_ratio.is_finite()) {
            return Err(Error::config(format!("gear ratio must be positive, got {}", self.gear_ratio)));
        }
        if !(self.gearbox_efficiency > 0.0 && self.gearbox_efficiency <= 1.0) {
            return Err(Error::config(format!(
                "gearbox efficiency must lie in (0, 1], got {}",
                self.gearbox_efficiency
            )));
        }
        total_inertia(self).map(|_| ())
    }

    /// Inertia of the physical parts, without the correction term.
    pub fn physical_inertia(&self) -> f64 {
        self.j_motor + self.j_gearbox + self.j_generator
    }
}

/// Four-term inertia sum. Rejects non-finite or non-positive totals.
pub fn total_inertia(params: &DrivetrainParams) -> Result<f64> {
    let parts = [params.j_motor, params.j_gearbox, params.j_generator, params.j_correction];
    if parts.iter().any(|j| !j.is_finite()) {
        return Err(Error::config("inertias must be finite"));
    }
    let total: f64 = parts.iter().sum();
    if total <= 0.0 {
        return Err(Error::config(format!("total inertia must be positive, got {total} kg·m²")));
    }
    Ok(total)
}

/// Generator-side (ω_g, T_g) = (ω·i, η_gb·T/i).
pub fn reflect_to_generator(omega: f64, torque: f64, params: &DrivetrainParams) -> (f64, f64) {
    let i = params.gear_ratio;
    (omega * i, params.gearbox_efficiency * torque / i)
}

/// Turbine-side shaft state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShaftState {
    /// rad/s, never negative.
    pub omega: f64,
    /// s
    pub t: f64,
}

/// Advances the shaft by one RK4 step with both torques held constant.
pub fn step_dynamics(
    state: ShaftState,
    t_aero: f64,
    t_load: f64,
    params: &DrivetrainParams,
    dt: f64,
    max_dt: f64,
) -> Result<ShaftState> {
    step_dynamics_with(state, t_aero, |_| t_load, params, dt, max_dt)
}

/// Advances the shaft by one RK4 step.
///
/// The drive torque `t_aero` is held over the step; `load` is evaluated at every RK4 stage,
/// so speed-dependent loads (drag, optimal-load law) keep fourth-order accuracy.
/// The result is clamped at ω = 0.
pub fn step_dynamics_with<F: Fn(f64) -> f64>(
    state: ShaftState,
    t_aero: f64,
    load: F,
    params: &DrivetrainParams,
    dt: f64,
    max_dt: f64,
) -> Result<ShaftState> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    if dt > max_dt {
        return Err(Error::StepSize { dt, max_dt });
    }
    let j = total_inertia(params)?;
    let accel = |w: f64| (t_aero - load(w)) / j;
    let w = state.omega;
    let k1 = accel(w);
    let k2 = accel(w + 0.5 * dt * k1);
    let k3 = accel(w + 0.5 * dt * k2);
    let k4 = accel(w + dt * k3);
    let next = w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    Ok(ShaftState { omega: next.max(0.0), t: state.t + dt })
}

/// Sweep settings for the correction-inertia estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectionSweep {
    /// Lower end of the J_c range (kg·m²).
    pub jc_min: f64,
    pub jc_max: f64,
    /// Grid spacing of candidate J_c values.
    pub resolution: f64,
    /// Probe trajectory length (s).
    pub horizon: f64,
    /// Integration step of the probe trajectories (s).
    pub dt: f64,
}

impl Default for CorrectionSweep {
    fn default() -> Self {
        Self { jc_min: -0.2, jc_max: 0.2, resolution: 1e-4, horizon: 0.5, dt: 1e-4 }
    }
}

impl CorrectionSweep {
    pub fn validate(&self) -> Result<()> {
        if !(self.jc_max > self.jc_min) {
            return Err(Error::config("correction sweep needs jc_max > jc_min"));
        }
        if !(self.resolution > 0.0 && self.horizon > 0.0 && self.dt > 0.0) {
            return Err(Error::config("correction sweep resolution, horizon and dt must be positive"));
        }
        if self.horizon < 10.0 * self.dt {
            return Err(Error::config("correction sweep horizon must span at least 10 steps"));
        }
        Ok(())
    }

    /// Number of grid intervals; candidates are `jc_min + k·resolution` for `k ∈ 0..=len()`.
    pub fn len(&self) -> usize {
        ((self.jc_max - self.jc_min) / self.resolution).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn candidate(&self, k: usize) -> f64 {
        self.jc_min + k as f64 * self.resolution
    }
}

/// How the J_c grid is searched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStrategy {
    /// Every grid point.
    Exhaustive,
    /// Coarse grid, then successively finer grids around the best point. Exact on
    /// unimodal costs.
    #[default]
    Refine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionEstimate {
    pub j_correction: f64,
    /// Integrated squared speed error at the estimate (rad²/s).
    pub cost: f64,
    pub evaluations: usize,
}

/// Precomputed probe experiment: the undelayed reference trajectory and the delay in steps.
struct Probe<'a> {
    params: &'a DrivetrainParams,
    sweep: &'a CorrectionSweep,
    probe_torque: f64,
    delay_steps: usize,
    ideal: Vec<f64>,
}

impl<'a> Probe<'a> {
    fn new(
        loop_delay: f64,
        params: &'a DrivetrainParams,
        probe_torque: f64,
        sweep: &'a CorrectionSweep,
    ) -> Result<Self> {
        let steps = (sweep.horizon / sweep.dt).round() as usize;
        let physical = DrivetrainParams { j_correction: 0.0, ..*params };
        let mut state = ShaftState::default();
        let mut ideal = Vec::with_capacity(steps);
        for _ in 0..steps {
            state = step_dynamics(state, probe_torque, 0.0, &physical, sweep.dt, sweep.dt)?;
            ideal.push(state.omega);
        }
        Ok(Self { params, sweep, probe_torque, delay_steps: (loop_delay / sweep.dt).round() as usize, ideal })
    }

    /// Squared speed error of the delayed loop with correction `jc`; infinite if J ≤ 0.
    fn cost(&self, jc: f64) -> f64 {
        let emulated = DrivetrainParams { j_correction: jc, ..*self.params };
        if total_inertia(&emulated).is_err() {
            return f64::INFINITY;
        }
        let dt = self.sweep.dt;
        let mut state = ShaftState::default();
        let mut sse = 0.0;
        for (k, ideal) in self.ideal.iter().enumerate() {
            let applied = if k >= self.delay_steps { self.probe_torque } else { 0.0 };
            state = match step_dynamics(state, applied, 0.0, &emulated, dt, dt) {
                Ok(s) => s,
                Err(_) => return f64::INFINITY,
            };
            let e = state.omega - ideal;
            sse += e * e * dt;
        }
        sse
    }
}

/// Squared ω-trajectory error between the ideal undelayed plant (physical inertia) and the
/// emulation loop whose applied torque lags by `loop_delay`, with correction inertia `jc`,
/// under a torque step of `probe_torque` at t = 0.
pub fn correction_cost(
    jc: f64,
    loop_delay: f64,
    params: &DrivetrainParams,
    probe_torque: f64,
    sweep: &CorrectionSweep,
) -> Result<f64> {
    sweep.validate()?;
    Ok(Probe::new(loop_delay, params, probe_torque, sweep)?.cost(jc))
}

/// Correction inertia J_c that best matches the delayed emulation loop to the ideal plant.
pub fn estimate_correction_inertia(
    loop_delay: f64,
    params: &DrivetrainParams,
    probe_torque: f64,
    sweep: &CorrectionSweep,
) -> Result<CorrectionEstimate> {
    estimate_correction_inertia_with(
        Execution::default(),
        SweepStrategy::default(),
        loop_delay,
        params,
        probe_torque,
        sweep,
    )
}

pub fn estimate_correction_inertia_with(
    exec: Execution,
    strategy: SweepStrategy,
    loop_delay: f64,
    params: &DrivetrainParams,
    probe_torque: f64,
    sweep: &CorrectionSweep,
) -> Result<CorrectionEstimate> {
    if !(loop_delay >= 0.0) {
        return Err(Error::domain(format!("loop delay must be non-negative, got {loop_delay}")));
    }
    if !(probe_torque != 0.0 && probe_torque.is_finite()) {
        return Err(Error::domain("probe torque must be finite and non-zero"));
    }
    sweep.validate()?;
    if params.physical_inertia() <= 0.0 {
        return Err(Error::config("physical inertia must be positive"));
    }
    let probe = Probe::new(loop_delay, params, probe_torque, sweep)?;
    let n = sweep.len();

    let (best, cost, evaluations) = match strategy {
        SweepStrategy::Exhaustive => {
            let (k, c) = exec
                .argmin(0..n + 1, |k| probe.cost(sweep.candidate(k)))
                .ok_or_else(|| Error::Estimation("empty sweep".into()))?;
            (k, c, n + 1)
        }
        SweepStrategy::Refine => {
            let (mut lo, mut hi) = (0usize, n);
            let mut stride = (n / 32).max(1);
            let mut evaluations = 0;
            loop {
                let count = (hi - lo) / stride + 1;
                let index = |j: usize| (lo + j * stride).min(hi);
                let (j, c) = exec
                    .argmin(0..count + 1, |j| probe.cost(sweep.candidate(index(j))))
                    .ok_or_else(|| Error::Estimation("empty sweep".into()))?;
                evaluations += count + 1;
                let k = index(j);
                if stride == 1 {
                    break (k, c, evaluations);
                }
                lo = k.saturating_sub(stride);
                hi = (k + stride).min(n);
                stride = (stride / 8).max(1);
            }
        }
    };
    if !cost.is_finite() {
        return Err(Error::Estimation("no candidate yields a positive total inertia".into()));
    }
    if best == 0 || best == n {
        return Err(Error::Estimation(format!(
            "minimum lies on the sweep boundary (J_c = {}); widen [{}, {}]",
            sweep.candidate(best),
            sweep.jc_min,
            sweep.jc_max
        )));
    }
    Ok(CorrectionEstimate { j_correction: sweep.candidate(best), cost, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_params(j: f64) -> DrivetrainParams {
        DrivetrainParams { j_motor: j, j_gearbox: 0.0, j_generator: 0.0, ..Default::default() }
    }

    #[test]
    fn reflection_examples() {
        let direct = DrivetrainParams::default();
        assert_eq!(reflect_to_generator(7.0, 3.0, &direct), (7.0, 3.0));
        let geared = DrivetrainParams { gear_ratio: 5.0, ..direct };
        let (wg, tg) = reflect_to_generator(10.0, 50.0, &geared);
        assert_eq!((wg, tg), (50.0, 10.0));
        assert_eq!(wg * tg, 10.0 * 50.0);
        let lossy = DrivetrainParams { gearbox_efficiency: 0.95, ..geared };
        let (wg, tg) = reflect_to_generator(10.0, 50.0, &lossy);
        assert!((tg - 9.5).abs() < 1e-12);
        assert!((wg * tg - 0.95 * 500.0).abs() < 1e-9);
    }

    #[test]
    fn inertia_sum() {
        let p = |a, b, c, d| DrivetrainParams {
            j_motor: a,
            j_gearbox: b,
            j_generator: c,
            j_correction: d,
            ..Default::default()
        };
        assert_eq!(total_inertia(&p(1.0, 2.0, 3.0, 0.5)).unwrap(), 6.5);
        assert_eq!(total_inertia(&p(1.0, 0.0, 1.0, 0.0)).unwrap(), 2.0);
        assert!(matches!(total_inertia(&p(0.1, 0.1, 0.1, -0.5)), Err(Error::Config(_))));
        assert!(total_inertia(&p(f64::NAN, 0.1, 0.1, 0.0)).is_err());
        assert!(DrivetrainParams { gear_ratio: 0.0, ..Default::default() }.validate().is_err());
        assert!(DrivetrainParams { gearbox_efficiency: 1.2, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn constant_net_torque_step() {
        let p = unit_params(2.0);
        let s = step_dynamics(ShaftState { omega: 1.0, t: 0.0 }, 10.0, 6.0, &p, 0.01, 0.01).unwrap();
        assert!((s.omega - 1.02).abs() < 1e-12);
        assert!((s.t - 0.01).abs() < 1e-15);
        let eq = step_dynamics(ShaftState { omega: 3.0, t: 0.0 }, 5.0, 5.0, &p, 0.01, 0.01).unwrap();
        assert_eq!(eq.omega, 3.0);
    }

    #[test]
    fn step_errors_and_clamp() {
        let p = unit_params(1.0);
        let s = ShaftState { omega: 0.01, t: 0.0 };
        assert!(matches!(step_dynamics(s, 0.0, 0.0, &p, 0.02, 0.01), Err(Error::StepSize { .. })));
        assert!(step_dynamics(s, 0.0, 0.0, &p, 0.0, 0.01).is_err());
        let braked = step_dynamics(s, 0.0, 100.0, &p, 0.01, 0.01).unwrap();
        assert_eq!(braked.omega, 0.0);
    }

    // Closed form of J·dω/dt = T − k·ω: ω(t) = T/k + (ω0 − T/k)·exp(−k·t/J).
    fn drag_exact(t: f64, w0: f64, torque: f64, k: f64, j: f64) -> f64 {
        torque / k + (w0 - torque / k) * (-k * t / j).exp()
    }

    fn drag_max_rel_error(dt: f64) -> f64 {
        let (j, k, torque, w0) = (0.5, 0.3, 4.0, 2.0);
        let p = unit_params(j);
        let steps = (10.0 / dt).round() as usize;
        let mut s = ShaftState { omega: w0, t: 0.0 };
        let mut worst: f64 = 0.0;
        for n in 1..=steps {
            s = step_dynamics_with(s, torque, |w| k * w, &p, dt, dt).unwrap();
            let exact = drag_exact(n as f64 * dt, w0, torque, k, j);
            worst = worst.max(((s.omega - exact) / exact).abs());
        }
        worst
    }

    #[test]
    fn linear_drag_matches_closed_form() {
        assert!(drag_max_rel_error(1e-3) < 1e-8);
    }

    #[test]
    fn integrator_order() {
        let coarse = drag_max_rel_error(0.2);
        let fine = drag_max_rel_error(0.1);
        assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn energy_bookkeeping() {
        let (j, k, torque) = (0.09, 0.8, 20.0);
        let p = unit_params(j);
        let dt = 1e-3;
        let mut s = ShaftState { omega: 0.5, t: 0.0 };
        let w_start = s.omega;
        let mut work = 0.0;
        for _ in 0..5000 {
            let prev = s.omega;
            s = step_dynamics_with(s, torque, |w| k * w * w, &p, dt, dt).unwrap();
            let net = |w: f64| (torque - k * w * w) * w;
            work += 0.5 * (net(prev) + net(s.omega)) * dt;
        }
        let kinetic = 0.5 * j * (s.omega * s.omega - w_start * w_start);
        assert!(((work - kinetic) / kinetic).abs() < 1e-3, "{work} vs {kinetic}");
    }

    fn small_sweep() -> CorrectionSweep {
        CorrectionSweep { jc_min: -0.2, jc_max: 0.2, resolution: 1e-4, horizon: 0.2, dt: 5e-4 }
    }

    #[test]
    fn no_delay_needs_no_correction() {
        let est = estimate_correction_inertia(0.0, &unit_params(1.0), 10.0, &small_sweep()).unwrap();
        assert!(est.j_correction.abs() <= small_sweep().resolution, "{est:?}");
    }

    #[test]
    fn delay_calls_for_negative_correction() {
        let est = estimate_correction_inertia(0.01, &unit_params(1.0), 10.0, &small_sweep()).unwrap();
        assert!(est.j_correction < 0.0);
        let doubled = estimate_correction_inertia(0.01, &unit_params(1.0), 20.0, &small_sweep()).unwrap();
        assert!((doubled.j_correction - est.j_correction).abs() <= small_sweep().resolution);
    }

    #[test]
    fn refine_matches_exhaustive() {
        let sweep = small_sweep();
        let p = unit_params(1.0);
        let run = |s| estimate_correction_inertia_with(Execution::default(), s, 0.01, &p, 10.0, &sweep).unwrap();
        let exhaustive = run(SweepStrategy::Exhaustive);
        let refined = run(SweepStrategy::Refine);
        assert_eq!(exhaustive.j_correction, refined.j_correction);
        assert!(refined.evaluations < exhaustive.evaluations / 10);
        let seq =
            estimate_correction_inertia_with(Execution::Sequential, SweepStrategy::Refine, 0.01, &p, 10.0, &sweep)
                .unwrap();
        assert_eq!(seq, refined);
    }

    #[test]
    fn boundary_minimum_is_an_error() {
        let narrow = CorrectionSweep { jc_min: 0.01, jc_max: 0.05, ..small_sweep() };
        let err = estimate_correction_inertia(0.01, &unit_params(1.0), 10.0, &narrow).unwrap_err();
        assert!(matches!(err, Error::Estimation(_)));
        assert!(estimate_correction_inertia(-1.0, &unit_params(1.0), 10.0, &small_sweep()).is_err());
    }

    proptest! {
        #[test]
        fn lossless_reflection_conserves_power(w in 0.0f64..500.0, t in -1e3f64..1e3, i in 0.05f64..50.0) {
            let p = DrivetrainParams { gear_ratio: i, ..Default::default() };
            let (wg, tg) = reflect_to_generator(w, t, &p);
            let scale = (w * t).abs().max(1.0);
            prop_assert!((wg * tg - w * t).abs() <= 4.0 * f64::EPSILON * scale);
        }

        #[test]
        fn lossy_reflection_scales_power(w in 0.0f64..500.0, t in -1e3f64..1e3, i in 0.05f64..50.0, eta in 0.01f64..1.0) {
            let p = DrivetrainParams { gear_ratio: i, gearbox_efficiency: eta, ..Default::default() };
            let (wg, tg) = reflect_to_generator(w, t, &p);
            let scale = (w * t).abs().max(1.0);
            prop_assert!((wg * tg - eta * w * t).abs() <= 8.0 * f64::EPSILON * scale);
        }
    }
}
