use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use flatrank_core::laurent::coset_count;
use flatrank_core::tree::{build_level_tree, RegularBall};
use flatrank_core::{
    four_point_delta, four_point_delta_parallel, orbit_growth_scale, AffineElement,
    GeneratedAction, MapTable, SubgroupIndexK, TruncatedLaurent,
};

fn delta_scans(c: &mut Criterion) {
    let ball = RegularBall::new(2, 5).unwrap();
    let space = ball.tree().metric_space();
    c.bench_function("four_point_delta/ball_94", |b| b.iter(|| four_point_delta(black_box(&space))));
    c.bench_function("four_point_delta_parallel/ball_94", |b| {
        b.iter(|| four_point_delta_parallel(black_box(&space)))
    });
}

fn coset_enumeration(c: &mut Criterion) {
    c.bench_function("coset_count/q3_span8", |b| {
        b.iter(|| coset_count(black_box(3), SubgroupIndexK(-4), SubgroupIndexK(4)).unwrap())
    });
}

fn orbit_growth(c: &mut Criterion) {
    let q = 2;
    let lt = build_level_tree(q, -1..=12, 0..12).unwrap();
    let n = lt.tree().len();
    let gens: Vec<_> = lt
        .tail_window()
        .map(|j| {
            let g = AffineElement::additive(TruncatedLaurent::monomial(q, 1, j).unwrap());
            MapTable::from_map(n, &lt.affine_map(&g).unwrap())
        })
        .collect();
    let action = GeneratedAction::new(lt.tree(), gens).unwrap();
    let h = AffineElement::translation(q, -2).unwrap();
    let hmap = MapTable::from_map(n, &lt.affine_map(&h).unwrap());
    let base = lt.base_vertex(0).unwrap();
    c.bench_function("orbit_growth_scale/q2_n-2_steps6", |b| {
        b.iter(|| orbit_growth_scale(&action, &hmap, black_box(base), 6).unwrap())
    });
}

criterion_group!(benches, delta_scans, coset_enumeration, orbit_growth);
criterion_main!(benches);
