//! Replica-parallel vs sequential execution of the same estimators.
//! Outputs are identical by construction; only wall time differs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpp_core::estimators::{estimate_mu, estimate_one_arm, GaussianSampler, GridParams, ModelKind, ModelSpec, Sampling};
use fpp_core::par::Execution;
use fpp_core::RngSeed;

fn modes() -> [(&'static str, Execution); 2] {
    [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)]
}

fn one_arm(c: &mut Criterion) {
    let model = ModelSpec::bernoulli(0.5);
    let mut g = c.benchmark_group("one_arm_bernoulli");
    g.sample_size(10);
    for (name, exec) in modes() {
        let run = Sampling { replicas: 400, seed: RngSeed::new(1, 0, "bench"), exec };
        g.bench_with_input(BenchmarkId::from_parameter(name), &run, |b, run| {
            b.iter(|| estimate_one_arm(&model, &[4.0, 8.0, 16.0], None, run).unwrap())
        });
    }
    g.finish();
}

fn mu_gaussian(c: &mut Criterion) {
    let model = ModelSpec::new(ModelKind::BargmannFock { p: 0.5, sampler: GaussianSampler::Spectral })
        .with_grid(GridParams { spacing: 0.5, ..GridParams::default() });
    let mut g = c.benchmark_group("mu_bargmann_fock");
    g.sample_size(10);
    for (name, exec) in modes() {
        let run = Sampling { replicas: 16, seed: RngSeed::new(2, 0, "bench"), exec };
        g.bench_with_input(BenchmarkId::from_parameter(name), &run, |b, run| {
            b.iter(|| estimate_mu(&model, &[1.0, 0.0], &[8, 16], run).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, one_arm, mu_gaussian);
criterion_main!(benches);
