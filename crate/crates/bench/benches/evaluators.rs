use criterion::{criterion_group, criterion_main, Criterion};
use dbfock::levelset::d_eps;
use dbfock::{HermiteBiehlerModel, KernelEval, Truncation};
use num_complex::Complex64;
use std::hint::black_box;

fn finite_model(n: usize) -> HermiteBiehlerModel {
    let zeros = (0..n).map(|k| Complex64::new(k as f64 - n as f64 / 2.0, 0.5 + (k % 7) as f64 * 0.3)).collect();
    HermiteBiehlerModel::finite(zeros, 0.0).unwrap()
}

fn theta(c: &mut Criterion) {
    let z = Complex64::new(0.3, 0.7);
    for n in [20, 2000] {
        let m = finite_model(n);
        c.bench_function(&format!("log_theta/finite_{n}"), |b| b.iter(|| m.log_theta(black_box(z)).unwrap()));
    }
    let p = HermiteBiehlerModel::power(0.75, Truncation::default()).unwrap();
    c.bench_function("log_theta/power", |b| b.iter(|| p.log_theta(black_box(z)).unwrap()));
    c.bench_function("phase_derivative/power", |b| b.iter(|| p.phase_derivative(black_box(12.5)).unwrap()));
}

fn kernels(c: &mut Criterion) {
    let m = finite_model(200);
    let k = KernelEval::new(&m);
    let (v, w) = (Complex64::new(0.1, 0.4), Complex64::new(0.1 + 1e-9, 0.4));
    c.bench_function("k_big/near_diagonal", |b| b.iter(|| k.k_big(black_box(v), black_box(w)).unwrap()));
}

fn distance(c: &mut Criterion) {
    let m = finite_model(50);
    let z = Complex64::new(40.0, 0.5);
    c.bench_function("d_eps/finite_50", |b| b.iter(|| d_eps(&m, black_box(z), 0.1).unwrap()));
}

criterion_group!(benches, theta, kernels, distance);
criterion_main!(benches);
