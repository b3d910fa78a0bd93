use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use ruinlab::chain::estimate_ruin;
use ruinlab::fixed_point::estimate_c1;
use ruinlab::PremiumSchedule;
use ruinlab_bench::{chain_config, exp_claims, perpetuity_config, unit_beta};

fn estimators(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);

    let cfg = chain_config(PremiumSchedule::Zero, 10_000);
    group.throughput(Throughput::Elements(cfg.n_paths));
    group.bench_function("ruin_u20_10k_paths", |b| b.iter(|| black_box(estimate_ruin(20.0, &cfg).unwrap())));

    let pc = perpetuity_config(10_000);
    group.throughput(Throughput::Elements(pc.n_samples));
    group.bench_function("c1_10k_samples", |b| b.iter(|| black_box(estimate_c1(&unit_beta(), &exp_claims(), &pc).unwrap())));
    group.finish();
}

criterion_group!(benches, estimators);
criterion_main!(benches);
