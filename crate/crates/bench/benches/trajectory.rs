//! Whole-orbit costs: recorded iteration, convergence runs, and the full
//! four-check verification.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use twolocus::{iterate, run_to_convergence, verify_against_oracle, StopCriterion};
use twolocus_bench::{float_params, float_state};

fn bench_orbits(c: &mut Criterion) {
    let state = float_state();
    let params = float_params();
    let crit = StopCriterion::new(1e-10, 10_000).expect("valid criterion");

    c.bench_function("iterate/200_steps/f64", |b| {
        b.iter(|| iterate(black_box(&state), black_box(&params), black_box(200)))
    });
    c.bench_function("run_to_convergence/eps1e-10/f64", |b| {
        b.iter(|| run_to_convergence(black_box(&state), black_box(&params), black_box(&crit)))
    });
    c.bench_function("verify_against_oracle/eps1e-10/f64", |b| {
        b.iter(|| verify_against_oracle(black_box(&state), black_box(&params), black_box(&crit)))
    });
}

criterion_group!(benches, bench_orbits);
criterion_main!(benches);
