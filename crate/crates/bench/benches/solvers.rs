use criterion::{black_box, criterion_group, criterion_main, Criterion};
use univinf_bench::{dense_capacity, game_capacity, tilted_density};
use univinf_core::solvers::{closed_form_lfp, feasibility_density, kl_projection, lfp_density, lfp_pair};

fn bench_game(c: &mut Criterion) {
    let cap = game_capacity([-1.0, -1.0]);
    let p = tilted_density(4);
    c.bench_function("game lfp closed form", |b| b.iter(|| closed_form_lfp(black_box(&cap), black_box(&p))));
    c.bench_function("game lfp barrier", |b| b.iter(|| lfp_density(black_box(&cap), black_box(&p))));
    c.bench_function("game feasibility lp", |b| b.iter(|| feasibility_density(black_box(&cap))));
}

fn bench_dense(c: &mut Criterion) {
    for m in [4, 6, 8] {
        let cap = dense_capacity(m);
        let p = tilted_density(m);
        c.bench_function(&format!("lfp barrier m={m}"), |b| b.iter(|| lfp_density(black_box(&cap), black_box(&p))));
        c.bench_function(&format!("kl projection m={m}"), |b| b.iter(|| kl_projection(black_box(&p), black_box(&cap))));
    }
    let c0 = dense_capacity(4);
    let c1 = game_capacity([-0.5, -1.5]);
    c.bench_function("lfp pair m=4", |b| b.iter(|| lfp_pair(black_box(&c0), black_box(&c1))));
}

criterion_group!(benches, bench_game, bench_dense);
criterion_main!(benches);
