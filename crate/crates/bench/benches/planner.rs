use criterion::{criterion_group, criterion_main, Criterion};
use msmcts::mcts::new_region;
use msmcts::{
    generate_scene, plan, tunnel_intersects_disc, tunnel_to, Disc, ObjectId, Point, SceneConfig,
    SearchBudget, StageContext,
};
use std::hint::black_box;

fn geometry(c: &mut Criterion) {
    let t = tunnel_to(Point::new(7.0, 15.0), Point::new(10.0, -3.0), 1.0, 4.0).unwrap();
    let d = Disc::new(Point::new(9.0, 8.0), 1.0);
    c.bench_function("tunnel_intersects_disc", |b| {
        b.iter(|| tunnel_intersects_disc(black_box(&t), black_box(&d)))
    });
}

fn regions(c: &mut Criterion) {
    let scene = generate_scene(&SceneConfig::with_objects(6, 3)).unwrap();
    let ctx = StageContext::from_sets(&scene, Vec::new(), scene.objects().collect());
    c.bench_function("new_region_m5", |b| {
        b.iter(|| new_region(&ctx, ObjectId(1), &[ObjectId(0)], &scene.start, 5))
    });
}

fn planning(c: &mut Criterion) {
    let mut group = c.benchmark_group("plan");
    group.sample_size(20);
    for n in [4, 6, 8] {
        let scene = generate_scene(&SceneConfig::with_objects(n, 17)).unwrap();
        let budget = SearchBudget::default().without_timeout();
        group.bench_function(format!("{n}_objects"), |b| b.iter(|| plan(black_box(&scene), &budget)));
    }
    group.finish();
}

criterion_group!(benches, geometry, regions, planning);
criterion_main!(benches);
