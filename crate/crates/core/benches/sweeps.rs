use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use windlab_core::drivetrain::{estimate_correction_inertia_with, CorrectionSweep, DrivetrainParams, SweepStrategy};
use windlab_core::mppt::mpp_locus_with;
use windlab_core::scenario::{Scenario, WindProfile};
use windlab_core::sim::{run::run_batch_with, BenchConfig};
use windlab_core::turbine::TurbineParams;
use windlab_core::Execution;

fn strategies() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
    ]
}

fn correction_sweep(c: &mut Criterion) {
    let params = DrivetrainParams { j_motor: 1.0, j_gearbox: 0.0, j_generator: 0.0, ..Default::default() };
    let sweep = CorrectionSweep { jc_min: -0.1, jc_max: 0.1, resolution: 1e-4, horizon: 0.2, dt: 5e-4 };
    let mut group = c.benchmark_group("correction_inertia_exhaustive");
    group.sample_size(10).measurement_time(Duration::from_secs(10));
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                black_box(
                    estimate_correction_inertia_with(exec, SweepStrategy::Exhaustive, 0.01, &params, 10.0, &sweep)
                        .unwrap(),
                )
            })
        });
    }
    group.finish();
}

fn power_curve(c: &mut Criterion) {
    let params = TurbineParams::default();
    let grid: Vec<f64> = (0..200_000).map(|k| k as f64 * 1e-4).collect();
    let mut group = c.benchmark_group("power_curve_200k");
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(params.power_curve_with(exec, 8.0, &grid).unwrap()))
        });
    }
    group.finish();
}

fn locus(c: &mut Criterion) {
    let params = TurbineParams::default();
    let speeds: Vec<f64> = (0..100_000).map(|k| 3.0 + k as f64 * 1e-4).collect();
    let mut group = c.benchmark_group("mpp_locus_100k");
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(mpp_locus_with(exec, &speeds, &params).unwrap()))
        });
    }
    group.finish();
}

fn scenario_batch(c: &mut Criterion) {
    let config = BenchConfig::default();
    let scenarios: Vec<Scenario> = (0..16)
        .map(|k| Scenario::new(WindProfile::Turbulent { v_base: 8.0, intensity: 0.1, seed: k, time_scale: 5.0 }, 5.0))
        .collect();
    let mut group = c.benchmark_group("scenario_batch_16x5s");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(run_batch_with(exec, &scenarios, &config)))
        });
    }
    group.finish();
}

criterion_group!(benches, correction_sweep, power_curve, locus, scenario_batch);
criterion_main!(benches);
