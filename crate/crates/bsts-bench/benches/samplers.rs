//! Hot-path benchmarks: the banded state draw, the two coefficient samplers,
//! and sparsification.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use bsts_core::linalg::banded_cholesky;
use bsts_core::shrinkage::{
    column_norms2, sample_beta_horseshoe, sample_beta_ssvs, savs_sparsify, HorseshoeState,
    SsvsState,
};
use bsts_core::state::{sample_states, state_posterior, ThetaParams};

fn bench_state_sampler(c: &mut Criterion) {
    let mut group = c.benchmark_group("state_sampler");
    for t_len in [50usize, 150, 400] {
        let theta = ThetaParams {
            tau0: 0.5,
            alpha0: 0.1,
            sigma_tau: 0.8,
            sigma_alpha: 0.3,
        };
        let y_hat = DVector::from_fn(t_len, |i, _| (i as f64 * 0.3).sin());
        group.bench_with_input(BenchmarkId::new("draw", t_len), &t_len, |b, _| {
            let mut rng = ChaCha20Rng::seed_from_u64(1);
            b.iter(|| sample_states(&y_hat, &theta, 1.0, &mut rng).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("cholesky", t_len), &t_len, |b, _| {
            let post = state_posterior(&y_hat, &theta, 1.0).unwrap();
            let banded = match &post.precision {
                bsts_core::linalg::PrecisionMatrix::Banded(m) => m.clone(),
                _ => unreachable!(),
            };
            b.iter(|| banded_cholesky(&banded).unwrap());
        });
    }
    group.finish();
}

fn bench_coefficient_samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("coefficient_draw");
    group.sample_size(20);
    let t_len = 150;
    for k in [60usize, 300] {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let x = DMatrix::from_fn(t_len, k, |_, _| rng.random::<f64>() - 0.5);
        let y = DVector::from_fn(t_len, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let hs = HorseshoeState::init(k);
        group.bench_with_input(BenchmarkId::new("horseshoe", k), &k, |b, _| {
            let mut rng = ChaCha20Rng::seed_from_u64(3);
            b.iter(|| sample_beta_horseshoe(&y, &x, &hs, 1.0, &mut rng).unwrap());
        });
        let ssvs = SsvsState::init(k, 1e-4);
        let xtx = x.transpose() * &x;
        group.bench_with_input(BenchmarkId::new("spike_slab", k), &k, |b, _| {
            let mut rng = ChaCha20Rng::seed_from_u64(4);
            b.iter(|| sample_beta_ssvs(&y, &x, &xtx, &ssvs, 1.0, &mut rng).unwrap());
        });
    }
    group.finish();
}

fn bench_savs(c: &mut Criterion) {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let k = 900;
    let beta = DVector::from_fn(k, |_, _| rng.random::<f64>() * 4.0 - 2.0);
    let x = DMatrix::from_fn(150, k, |_, _| rng.random::<f64>() - 0.5);
    let norms = column_norms2(&x);
    c.bench_function("savs_sparsify_900", |b| {
        b.iter(|| savs_sparsify(&beta, &norms))
    });
}

criterion_group!(
    benches,
    bench_state_sampler,
    bench_coefficient_samplers,
    bench_savs
);
criterion_main!(benches);
