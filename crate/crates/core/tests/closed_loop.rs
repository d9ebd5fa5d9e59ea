use windlab_core::reference::REFERENCE_TABLE;
use windlab_core::scenario::{EventAction, Mode, Scenario, ScenarioEvent, WindProfile};
use windlab_core::sim::{run_scenario, BenchConfig, Command, Session};

#[test]
fn speed_control_reaches_setpoint_without_offset() {
    let cfg = BenchConfig::default();
    let log = run_scenario(cfg.scenario("speed-control").unwrap(), &cfg).unwrap();
    let tail = &log.samples[log.samples.len() - 1000..];
    for s in tail {
        assert!((s.omega - 9.57).abs() < 1e-4, "ω = {} at t = {}", s.omega, s.t);
    }
}

#[test]
fn conversion_energy_balances_over_mpp_runs() {
    let cfg = BenchConfig::default();
    for name in ["mpp-4", "mpp-8", "mpp-12", "step-4-12", "gust"] {
        let summary = run_scenario(cfg.scenario(name).unwrap(), &cfg).unwrap().summary;
        assert!(summary.conservation_residual.abs() < 5e-3, "{name}: {}", summary.conservation_residual);
        assert!(summary.energy.shaft_residual().abs() < 5e-3, "{name}");
        assert_eq!(summary.trip_steps, 0, "{name}");
    }
}

#[test]
fn mpp_efficiency_settles_at_conversion_efficiency() {
    let cfg = BenchConfig::default();
    let last = run_scenario(cfg.scenario("mpp-8").unwrap(), &cfg).unwrap().summary.final_sample;
    assert!((last.p_est / last.p_wt - 0.8).abs() < 1e-3);
    assert!((last.p_exported - REFERENCE_TABLE[4].p_est).abs() / REFERENCE_TABLE[4].p_est < 5e-3);
}

#[test]
fn gust_is_tracked_and_released() {
    let cfg = BenchConfig::default();
    let log = run_scenario(cfg.scenario("gust").unwrap(), &cfg).unwrap();
    let peak = log.samples.iter().map(|s| s.omega).fold(0.0, f64::max);
    let steady = REFERENCE_TABLE[4].omega;
    assert!(peak > steady * 1.2, "peak {peak}");
    let last = log.samples.last().unwrap();
    assert!((last.omega - steady).abs() / steady < 1e-2);
}

#[test]
fn scheduled_trip_stops_export_until_reset() {
    let cfg = BenchConfig::default();
    let scenario = Scenario {
        events: vec![
            ScenarioEvent { at: 5.0, action: EventAction::Trip },
            ScenarioEvent { at: 6.0, action: EventAction::Reset },
        ],
        ..Scenario::new(WindProfile::Constant { v0: 8.0 }, 10.0)
    };
    let log = run_scenario(&scenario, &cfg).unwrap();
    for s in &log.samples[5001..=6000] {
        assert!(s.trip_latched && s.p_exported == 0.0 && s.t_load == 0.0, "step {}", s.step);
    }
    assert!(log.samples[6001..].iter().all(|s| !s.trip_latched && s.p_exported > 0.0));
}

#[test]
fn live_session_matches_headless_run() {
    let cfg = BenchConfig::default();
    let headless = run_scenario(cfg.scenario("mpp-12").unwrap(), &cfg).unwrap();
    let mut session = Session::new(cfg, "mpp-12").unwrap();
    session.handle(&Command::Start).unwrap();
    for k in 1..=2000 {
        let out = session.step().unwrap();
        assert_eq!(out.sample, headless.samples[k]);
    }
}

#[test]
fn mode_switch_mid_run() {
    let mut session = Session::new(BenchConfig::default(), "mpp-8").unwrap();
    for _ in 0..5000 {
        session.step().unwrap();
    }
    session.handle(&Command::SetMode { mode: Mode::SpeedControl, setpoint: Some(8.0) }).unwrap();
    for _ in 0..20_000 {
        session.step().unwrap();
    }
    let status = session.status();
    assert_eq!(status.mode, Mode::SpeedControl);
    assert!((status.sample.omega - 8.0).abs() < 1e-3);
}
