use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use leadnav::{
    build_visible_region, run, select_leader, AgentState, Disc, FrameworkConfig, Mode, Scene, Vec2,
};
use leadnav_bench::{crowd, crowd_log};

fn bench_visibility(c: &mut Criterion) {
    let mut group = c.benchmark_group("visible_region");
    for n in [0usize, 10, 40] {
        let discs: Vec<Disc> = crowd(n).iter().map(|h| Disc::new(h.state.position, 0.5)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &discs, |b, discs| {
            b.iter(|| build_visible_region(Vec2::ZERO, black_box(discs), &[], 10.0, 720).unwrap())
        });
    }
    group.finish();
}

fn bench_select_leader(c: &mut Criterion) {
    let scene = Scene::open(Vec2::ZERO, Vec2::new(30.0, 0.0)).unwrap();
    let cfg = FrameworkConfig::default();
    let mut group = c.benchmark_group("select_leader");
    for n in [1usize, 10, 40] {
        let humans = crowd(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &humans, |b, humans| {
            b.iter(|| select_leader(&AgentState::default(), black_box(humans), &scene, None, &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_run(c: &mut Criterion) {
    let scene = Scene::open(Vec2::ZERO, Vec2::new(20.0, 0.0)).unwrap();
    let cfg = FrameworkConfig::default();
    let log = crowd_log(12, 600);
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    for mode in [Mode::Framework, Mode::RawSf] {
        group.bench_function(mode.to_string(), |b| b.iter(|| run(&scene, &log, &cfg, mode, 0).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_visibility, bench_select_leader, bench_run);
criterion_main!(benches);
