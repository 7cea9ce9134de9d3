use cnfcompact::{closed_itemsets, compact, reduce_binary, solve, Mode, ReduceOptions};
use cnfcompact_bench::{biclique, clique, planted, transactions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

fn mining(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_itemsets");
    for clauses in [500, 2000, 8000] {
        let db = transactions(&planted(1, clauses as u32 / 10, clauses));
        group.throughput(Throughput::Elements(clauses as u64));
        group.bench_with_input(BenchmarkId::from_parameter(clauses), &db, |b, db| {
            b.iter(|| closed_itemsets(black_box(db), 2, 2))
        });
    }
    group.finish();
}

fn general(c: &mut Criterion) {
    let options = ReduceOptions::default();
    let mut group = c.benchmark_group("reduce_general");
    for clauses in [500, 2000, 8000] {
        let f = planted(2, clauses as u32 / 10, clauses);
        group.throughput(Throughput::Elements(f.literal_count() as u64));
        for parts in [1, 4] {
            group.bench_with_input(BenchmarkId::new(format!("parts{parts}"), clauses), &f, |b, f| {
                b.iter(|| compact(black_box(f), Mode::General, parts, &options).unwrap())
            });
        }
    }
    group.finish();
}

fn binary(c: &mut Criterion) {
    let options = ReduceOptions::default();
    let mut group = c.benchmark_group("reduce_binary");
    for n in [16, 32, 64, 128] {
        let f = clique(n);
        group.bench_with_input(BenchmarkId::new("clique", n), &f, |b, f| {
            b.iter(|| reduce_binary(black_box(f), &options).unwrap())
        });
    }
    let f = biclique(40, 40);
    group.bench_function("biclique/40x40", |b| {
        b.iter(|| reduce_binary(black_box(&f), &options).unwrap())
    });
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let f = planted(3, 20, 90);
    c.bench_function("solve/20vars", |b| b.iter(|| solve(black_box(&f), 24).unwrap()));
}

criterion_group!(benches, mining, general, binary, oracle);
criterion_main!(benches);
