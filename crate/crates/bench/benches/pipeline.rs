use criterion::{black_box, criterion_group, criterion_main, Criterion};
use univinf_bench::{game_sample, small_design};
use univinf_core::inference::{crossfit_lr, split_sample, HypothesisSpec, SearchBox, TestConfig};
use univinf_core::models::EntryGame;
use univinf_core::simulation::mc_table;

fn bench_crossfit(c: &mut Criterion) {
    let game = EntryGame::without_covariates();
    let hyp = HypothesisSpec::new(vec![vec![0.0, 0.0]], SearchBox::new(vec![-3.0, -3.0], vec![0.0, 0.0]).unwrap()).unwrap();
    let config = TestConfig::default();
    for n in [100, 1000] {
        let data = game_sample(n, -0.5, 7);
        let plan = split_sample(&data, 7).unwrap();
        c.bench_function(&format!("crossfit n={n}"), |b| {
            b.iter(|| crossfit_lr(black_box(&data), &plan, &hyp, &game, &config))
        });
    }
}

fn bench_monte_carlo(c: &mut Criterion) {
    let design = small_design(100, 0.345, 50);
    let mut group = c.benchmark_group("monte carlo");
    group.sample_size(10);
    group.bench_function("50 replications n=100", |b| b.iter(|| mc_table(black_box(&design))));
    group.finish();
}

criterion_group!(benches, bench_crossfit, bench_monte_carlo);
criterion_main!(benches);
