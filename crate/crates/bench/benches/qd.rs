use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qd_bench::scenario;
use qd_core::channel::power_surrogate;
use qd_core::mc::estimate_qd_prob;
use qd_core::qd::{qd_prob_quadrature, qd_prob_series};
use qd_core::specfn::{gauss_2f1, reg_inc_beta};
use qd_core::QuadratureSpec;

fn special_functions(c: &mut Criterion) {
    c.bench_function("reg_inc_beta", |b| b.iter(|| reg_inc_beta(black_box(7.3), 4.1, 0.37)));
    c.bench_function("gauss_2f1 z=-3", |b| b.iter(|| gauss_2f1(black_box(12.0), 4.0, 5.0, -3.0)));
}

fn analytic(c: &mut Criterion) {
    let spec = QuadratureSpec::default();
    let strong = scenario(6.0, 25.0);
    let weak = scenario(6.0, 0.5);
    c.bench_function("power_surrogate", |b| b.iter(|| power_surrogate(black_box(&strong.user_i))));
    c.bench_function("qd_prob_quadrature", |b| b.iter(|| qd_prob_quadrature(black_box(&strong), &spec)));
    c.bench_function("qd_prob_series", |b| b.iter(|| qd_prob_series(black_box(&weak), 5000, 1e-10)));
}

fn monte_carlo(c: &mut Criterion) {
    let s = scenario(6.0, 25.0);
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    g.bench_function("estimate_qd_prob 1e5", |b| b.iter(|| estimate_qd_prob(black_box(&s), 100_000, 7)));
    g.finish();
}

criterion_group!(benches, special_functions, analytic, monte_carlo);
criterion_main!(benches);
