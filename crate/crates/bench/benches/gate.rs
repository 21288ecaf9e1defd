use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sprint_core::model::{average_over, effective_detunings, gate_outcome, GateResponse};
use sprint_core::optimize::{optimize_asymmetric, OptimizationBounds};
use sprint_core::oracle::OracleConfig;
use sprint_core::units::mhz;
use sprint_core::{
    CavityFlavor, CavityParams, DriveSettings, IonId, JointQubitState, Preset, SamplerSpec,
};

fn closed_form(c: &mut Criterion) {
    let p = Preset::new(IonId::Ca40, CavityFlavor::Conventional);
    let dets = effective_detunings(&DriveSettings::detuned(1e5, 2.8e8, 0.5), &p.system);
    let state = JointQubitState::from_angles(1.0, 0.3, 2.0, -0.7);

    c.bench_function("gate_outcome", |b| {
        b.iter(|| gate_outcome(black_box(&state), &p.system, &p.cavity, &dets).unwrap())
    });

    let response = GateResponse::new(&p.system, &p.cavity, &dets).unwrap();
    c.bench_function("prepared_outcome", |b| {
        b.iter(|| response.outcome(black_box(&state)))
    });

    let samples = SamplerSpec::haar(10_000).draw().unwrap();
    c.bench_function("average_10k", |b| {
        b.iter(|| average_over(&response, black_box(&samples)).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    // Small rate spread keeps a single run around a few thousand steps.
    let p = Preset::new(IonId::Yb171, CavityFlavor::Fiber);
    let cavity = CavityParams::new(mhz(45.0), mhz(30.0)).unwrap();
    let dets = effective_detunings(&DriveSettings::resonant(), &p.system);
    let state = JointQubitState::from_angles(1.0, 0.0, 2.0, 0.0);
    let cfg = OracleConfig {
        kappa_s_ratio: 20.0,
        steps_per_rate: 50.0,
        ..Default::default()
    };
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("single_run", |b| {
        b.iter(|| {
            cfg.run(black_box(&state), &p.system, &cavity, &dets)
                .unwrap()
        })
    });
    g.finish();
}

fn optimizer(c: &mut Criterion) {
    let p = Preset::new(IonId::Ca40, CavityFlavor::Conventional);
    let bounds = OptimizationBounds::default_for(&p.system, &p.cavity, false);
    let sampler = SamplerSpec::haar(64);
    let mut g = c.benchmark_group("optimizer");
    g.sample_size(10);
    g.bench_function("asymmetric_64_samples", |b| {
        b.iter(|| optimize_asymmetric(&p.system, &p.cavity, black_box(&bounds), &sampler).unwrap())
    });
    g.finish();
}

criterion_group!(benches, closed_form, oracle, optimizer);
criterion_main!(benches);
