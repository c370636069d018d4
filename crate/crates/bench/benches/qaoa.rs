use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use protes_qaoa::protes::{self, ParameterGrid};
use protes_qaoa::tt::TtDistribution;
use protes_qaoa::{Backend, MultiIndex, ProtesConfig, QaoaInstance};
use protes_qaoa_bench::{g4, random_graph, random_theta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn circuit(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_qaoa");
    for n in [4, 6, 8] {
        let inst = QaoaInstance::new(random_graph(n, 1), 4, Backend::Diagonal).unwrap();
        let theta = random_theta(4, 2);
        group.bench_with_input(BenchmarkId::new("diagonal_p4", n), &n, |b, _| b.iter(|| inst.energy(black_box(&theta)).unwrap()));
    }
    let gate = QaoaInstance::new(g4(), 4, Backend::GateLevel).unwrap();
    let theta = random_theta(4, 2);
    group.bench_function("gate_p4_g4", |b| b.iter(|| gate.energy(black_box(&theta)).unwrap()));
    group.finish();
}

fn tensor_train(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let tt = TtDistribution::random(8, 100, 5, &mut rng).unwrap();
    c.bench_function("tt_sample_batch_20", |b| b.iter(|| tt.sample_batch(20, &mut rng)));
    let (batch, _) = tt.sample_batch(10, &mut rng);
    c.bench_function("tt_ascent_k10_gd5", |b| {
        b.iter_batched(
            || tt.clone(),
            |mut t| t.ascent_step(&batch, 0.05, 5).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn optimizer(c: &mut Criterion) {
    let inst = QaoaInstance::new(g4(), 4, Backend::Diagonal).unwrap();
    let grid = ParameterGrid::for_depth(4, 100);
    let objective = |idx: &MultiIndex| inst.energy(&grid.index_to_params(idx).unwrap()).unwrap();
    let cfg = ProtesConfig { budget: 20, ..Default::default() };
    c.bench_function("protes_iteration_g4_p4", |b| b.iter(|| protes::optimize(objective, 8, black_box(&cfg)).unwrap()));
}

criterion_group!(benches, circuit, tensor_train, optimizer);
criterion_main!(benches);
