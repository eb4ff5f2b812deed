use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use leadfollow::cluster::cluster_cofaction;
use leadfollow::dtw::DtwBuffer;
use leadfollow::faction::leader_series;
use leadfollow::network::build_dynamic_network;
use leadfollow::pipeline::{diagram_stage, PipelineConfig};
use leadfollow::followership::cofaction_matrix;
use leadfollow::{FollowingParams, Kernel, WindowSpec};
use leadfollow_bench::{dataset, track};

fn dtw(c: &mut Criterion) {
    let mut g = c.benchmark_group("dtw");
    let mut buf = DtwBuffer::new();
    for len in [20, 50, 100, 200] {
        let p = track(len, 0);
        let q = track(len, 3);
        g.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| {
            b.iter(|| buf.path(black_box(&p), black_box(&q), Kernel::Euclidean).unwrap())
        });
    }
    g.finish();
}

fn network(c: &mut Criterion) {
    let ds = dataset(400);
    let mut g = c.benchmark_group("following_network");
    g.sample_size(10);
    for omega in [20, 50] {
        let spec = WindowSpec::with_default_delta(omega);
        g.bench_with_input(BenchmarkId::from_parameter(omega), &spec, |b, &spec| {
            b.iter(|| build_dynamic_network(&ds, spec, &FollowingParams::default()).unwrap())
        });
    }
    g.finish();
}

fn downstream(c: &mut Criterion) {
    let ds = dataset(800);
    let net = build_dynamic_network(&ds, WindowSpec::with_default_delta(20), &FollowingParams::default()).unwrap();
    let cfg = PipelineConfig::new(20);
    c.bench_function("leaders", |b| b.iter(|| leader_series(black_box(&net))));
    let (leaders, factions) = leader_series(&net);
    c.bench_function("diagram", |b| b.iter(|| diagram_stage(black_box(&leaders), &cfg).unwrap()));
    let support = cofaction_matrix(&factions);
    c.bench_function("cluster", |b| b.iter(|| cluster_cofaction(black_box(&support), cfg.min_spread).unwrap()));
}

criterion_group!(benches, dtw, network, downstream);
criterion_main!(benches);
