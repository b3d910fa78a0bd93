use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ruinlab::bridge::{eta_integral, sample_bridge, BridgeGrid};
use ruinlab::chain::simulate_chain;
use ruinlab::fixed_point::sample_r;
use ruinlab::oracle::simulate_path;
use ruinlab::rng::path_stream;
use ruinlab::PremiumSchedule;
use ruinlab_bench::{chain_config, exp_claims, oracle_config, perpetuity_config, unit_beta};

fn bridge(c: &mut Criterion) {
    let mut group = c.benchmark_group("bridge");
    let params = unit_beta();
    let sched = PremiumSchedule::Constant { rate: 1.0 };
    for n in [16, 64, 256] {
        group.bench_with_input(BenchmarkId::new("resample_and_eta", n), &n, |b, &n| {
            let mut rng = path_stream(1, 0, 0);
            let mut grid = BridgeGrid::with_capacity(n);
            b.iter(|| {
                grid.resample(&mut rng, 1.0, 0.3, n);
                black_box(eta_integral(&grid, &sched, &params, 0.0, 0.0))
            })
        });
    }
    group.bench_function("sample_bridge_64", |b| {
        let mut rng = path_stream(2, 0, 0);
        b.iter(|| black_box(sample_bridge(&mut rng, 1.0, 0.3, 64)))
    });
    group.finish();
}

fn paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("path");
    let zero = chain_config(PremiumSchedule::Zero, 1);
    let constant = chain_config(PremiumSchedule::Constant { rate: 1.0 }, 1);
    let mut i = 0;
    group.bench_function("chain_zero_premium_u20", |b| {
        b.iter(|| {
            i += 1;
            black_box(simulate_chain(20.0, &zero, &mut path_stream(1, 0, i)))
        })
    });
    group.bench_function("chain_constant_premium_u20", |b| {
        b.iter(|| {
            i += 1;
            black_box(simulate_chain(20.0, &constant, &mut path_stream(1, 0, i)))
        })
    });
    let pc = perpetuity_config(1);
    group.bench_function("perpetuity_r", |b| {
        b.iter(|| {
            i += 1;
            black_box(sample_r(&mut path_stream(2, 0, i), &unit_beta(), &exp_claims(), &pc))
        })
    });
    let oracle = oracle_config();
    group.bench_function("oracle_unit_horizon", |b| {
        b.iter(|| {
            i += 1;
            black_box(simulate_path(5.0, &oracle, &mut path_stream(3, 0, i)))
        })
    });
    group.finish();
}

criterion_group!(benches, bridge, paths);
criterion_main!(benches);
