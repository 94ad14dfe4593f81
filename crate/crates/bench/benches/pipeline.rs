use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};

use oposim::{
    mc_phase_estimator_experiment, opo_diffused_moments, sample_quadrature, threshold_bisection,
    threshold_closed_form, CoherentSignal, PhaseDiffusion, SamplerConfig, SigmaGrid, StateSpec,
};
use oposim_bench::config_a;

fn bench_moments(c: &mut Criterion) {
    let (beta, coupling, drive) = config_a();
    let noise = PhaseDiffusion::new(0.25).unwrap();
    c.bench_function("opo_diffused_moments", |b| {
        b.iter(|| opo_diffused_moments(black_box(beta), noise, coupling, drive).unwrap())
    });
}

fn bench_threshold(c: &mut Criterion) {
    let (beta, coupling, drive) = config_a();
    c.bench_function("threshold_closed_form", |b| {
        b.iter(|| threshold_closed_form(black_box(beta), coupling, drive).unwrap())
    });
    c.bench_function("threshold_bisection", |b| {
        b.iter(|| threshold_bisection(black_box(beta), coupling, drive, SigmaGrid::default()).unwrap())
    });
}

fn bench_sampling(c: &mut Criterion) {
    let (beta, coupling, drive) = config_a();
    let state = StateSpec::OpoDiffused {
        beta,
        noise: PhaseDiffusion::new(0.25).unwrap(),
        coupling,
        drive,
    };
    let n = 10_000;
    let mut group = c.benchmark_group("sampling");
    group.throughput(Throughput::Elements(n as u64));
    group.bench_function("sample_quadrature_10k", |b| {
        let config = SamplerConfig::new(42, n, 1);
        b.iter(|| sample_quadrature(black_box(&state), 0.0, &config).unwrap())
    });
    group.finish();

    c.bench_function("estimator_experiment_100x1000", |b| {
        let state = StateSpec::Coherent {
            signal: CoherentSignal::new(2.0, 0.0).unwrap(),
        };
        let config = SamplerConfig::new(42, 1_000, 100);
        b.iter(|| mc_phase_estimator_experiment(black_box(&state), &config).unwrap())
    });
}

criterion_group!(benches, bench_moments, bench_threshold, bench_sampling);
criterion_main!(benches);
