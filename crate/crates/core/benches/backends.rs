//! Criterion comparison of the sequential and worker-pool backends at one
//! mid-grid size per workload. `cargo bench -p hetbench` runs the suite;
//! without the `parallel` feature the "par" entries measure the sequential
//! fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hetbench::exec::ExecPlan;
use hetbench::hamming::{self, ChannelConfig};
use hetbench::harness::{gen_inputs, Size, Workload, WorkloadInput};
use hetbench::kernels::{fft_batch, matmul, quicksort, Direction};

fn plans() -> Vec<(&'static str, ExecPlan)> {
    vec![
        ("seq", ExecPlan::sequential()),
        ("par", ExecPlan::parallel()),
    ]
}

fn bench_matmul(c: &mut Criterion) {
    let mut group = c.benchmark_group("matmul-200x200");
    let input = gen_inputs(Workload::Matmul, &Size::Square(200), 42).unwrap();
    let WorkloadInput::Matmul(a, b) = input else {
        unreachable!()
    };
    for (name, plan) in plans() {
        group.bench_function(name, |bench| {
            bench.iter(|| matmul(black_box(&a), black_box(&b), &plan).unwrap())
        });
    }
    group.finish();
}

fn bench_fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft-1024x128");
    let input = gen_inputs(
        Workload::Fft,
        &Size::Signal {
            len: 1024,
            batch: 128,
        },
        42,
    )
    .unwrap();
    let WorkloadInput::Fft(buf) = input else {
        unreachable!()
    };
    for (name, plan) in plans() {
        group.bench_function(name, |bench| {
            bench.iter(|| fft_batch(black_box(&buf), Direction::Forward, &plan).unwrap())
        });
    }
    group.finish();
}

fn bench_qsort(c: &mut Criterion) {
    let mut group = c.benchmark_group("qsort-100000");
    let input = gen_inputs(Workload::Qsort, &Size::Length(100_000), 42).unwrap();
    let WorkloadInput::Qsort(buf) = input else {
        unreachable!()
    };
    for (name, plan) in plans() {
        group.bench_function(name, |bench| {
            bench.iter(|| quicksort(black_box(&buf), &plan))
        });
    }
    group.finish();
}

fn bench_hamming(c: &mut Criterion) {
    let mut group = c.benchmark_group("hamming-20000");
    let words = hamming::gen_info_words(20_000, 42);
    let cfg = ChannelConfig::new(0.01, 42).unwrap();
    for (name, plan) in plans() {
        group.bench_function(format!("{name}/encode+channel"), |bench| {
            bench.iter(|| {
                let encoded = hamming::encode_block(black_box(&words), &plan);
                hamming::bsc_transmit(&encoded, &cfg, &plan).unwrap()
            })
        });
    }
    let encoded = hamming::encode_block(&words, &ExecPlan::sequential());
    let sent = hamming::bsc_transmit(&encoded, &cfg, &ExecPlan::sequential()).unwrap();
    for (name, plan) in plans() {
        group.bench_function(format!("{name}/decode"), |bench| {
            bench.iter(|| hamming::decode_block(black_box(&sent), &plan))
        });
    }
    group.finish();
}

criterion_group!(
    backends,
    bench_matmul,
    bench_fft,
    bench_qsort,
    bench_hamming
);
criterion_main!(backends);
