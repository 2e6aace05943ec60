use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cvqkd_core::atmosphere::{BeamSampler, LinkGeometry, PhiRange, TurbulenceProfile};
use cvqkd_core::experiment::{mean_key_rate, sample_transmissivities};
use cvqkd_core::{
    Execution, MonteCarloConfig, OptimizationConfig, Protocol, Scenario, SupermodeSpectrum, Variant,
};

fn sampler() -> BeamSampler {
    BeamSampler::for_link(
        &LinkGeometry::reference(),
        &TurbulenceProfile::reference(),
        PhiRange::default(),
    )
    .unwrap()
}

fn bench_sampling(c: &mut Criterion) {
    let sampler = sampler();
    let mut group = c.benchmark_group("sample_transmissivities");
    for execution in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::new(format!("{execution:?}"), 100_000),
            &execution,
            |b, &e| b.iter(|| sample_transmissivities(&sampler, 100_000, 1, e).unwrap()),
        );
    }
    group.finish();
}

fn bench_optimised_mean(c: &mut Criterion) {
    let sampler = sampler();
    let protocol = Protocol::baseline(
        SupermodeSpectrum::new(Scenario::Exponential { decay: 0.5 }, 5, 1.0).unwrap(),
    );
    let mc = MonteCarloConfig {
        samples: 64,
        seed: 1,
        per_sample_optimization: true,
    };
    let opt = OptimizationConfig::default();
    let mut group = c.benchmark_group("mean_key_rate_att_amp");
    group.sample_size(10);
    for execution in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::new(format!("{execution:?}"), mc.samples),
            &execution,
            |b, &e| b.iter(|| mean_key_rate(&sampler, &protocol, Variant::AttAmp, &mc, &opt, e).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_sampling, bench_optimised_mean);
criterion_main!(benches);
