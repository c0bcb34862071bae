use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qdepth_core::oracle::{compose_recursive, truth_table, RandomOracle};
use qdepth_core::{BitString, Seed};

fn oracle(c: &mut Criterion) {
    let f = RandomOracle::new(Seed::from_u64(1), "bench", 16, 16);
    c.bench_function("eval_u64 16->16", |b| {
        let mut x = 0u64;
        b.iter(|| {
            x = (x + 1) & 0xffff;
            black_box(f.eval_u64(black_box(x)))
        })
    });
    let wide = BitString::from_u64(0xabcd, 16);
    c.bench_function("eval bit string 16->16", |b| {
        b.iter(|| black_box(f.eval(black_box(&wide)).unwrap()))
    });

    let small = RandomOracle::new(Seed::from_u64(2), "table", 12, 12);
    c.bench_function("truth table 12->12", |b| {
        b.iter(|| black_box(truth_table(&small, 16).unwrap()))
    });

    let root = RandomOracle::root(Seed::from_u64(3), "composed");
    let comp = compose_recursive(&root, 3, 2, 3).unwrap();
    let x = BitString::from_u64(5, 3);
    c.bench_function("composed eval d=2 sigma=3", |b| {
        b.iter(|| black_box(comp.eval(black_box(&x)).unwrap()))
    });
}

criterion_group!(benches, oracle);
criterion_main!(benches);
