use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use onerel_bench::{example_system, random_words};
use onerel_core::{
    build_system, check_local_confluence, classify, critical_pairs, grid, DEFAULT_FUEL,
};

fn normal_form(c: &mut Criterion) {
    let sys = example_system();
    let mut group = c.benchmark_group("normal_form");
    for len in [16, 64, 256] {
        let words = random_words(b"abx", len, 64, len as u64);
        group.throughput(Throughput::Elements(words.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(len), &words, |b, words| {
            b.iter(|| {
                for w in words {
                    black_box(sys.normalize(w, DEFAULT_FUEL).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn confluence(c: &mut Criterion) {
    let systems: Vec<_> = grid(4)
        .map(|(a, b, g, d)| {
            let (tag, params) = classify(a as i64, b as i64, g as i64, d as i64).unwrap();
            build_system(tag, &params).unwrap()
        })
        .collect();
    c.bench_function("critical_pairs/grid4", |b| {
        b.iter(|| {
            systems
                .iter()
                .map(|s| critical_pairs(black_box(s)).len())
                .sum::<usize>()
        })
    });
    c.bench_function("local_confluence/grid4", |b| {
        b.iter(|| {
            systems
                .iter()
                .filter(|s| {
                    check_local_confluence(black_box(s), DEFAULT_FUEL)
                        .unwrap()
                        .joinable
                })
                .count()
        })
    });
}

criterion_group!(benches, normal_form, confluence);
criterion_main!(benches);
