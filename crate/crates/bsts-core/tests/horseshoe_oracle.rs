//! Long-run horseshoe Gibbs against a quadrature oracle on a two-coefficient
//! problem.
//!
//! With the observation variance held fixed, the posterior mean of the
//! coefficients can be computed by integrating the closed-form conditional
//! mean over the three scale parameters on a log grid:
//!
//! ```text
//! E[beta | y] = integral mu(l1, l2, nu) p(l1, l2, nu | y) dl
//! p(scales | y) proportional to m(y | scales) p(l1) p(l2) p(nu)
//! ```
//!
//! where `m` is the Gaussian marginal likelihood with the coefficients
//! integrated out and the scale priors are the squared half-Cauchy densities.
//! The Gibbs chain alternating the coefficient draw and the scale block must
//! reproduce that mean within Monte Carlo and grid error.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use bsts_core::shrinkage::{sample_beta_horseshoe, sample_horseshoe_scales, HorseshoeState};

/// Density of `s = lambda^2` when `lambda` is standard half-Cauchy.
fn squared_half_cauchy_pdf(s: f64) -> f64 {
    1.0 / (std::f64::consts::PI * s.sqrt() * (1.0 + s))
}

#[test]
fn gibbs_matches_grid_quadrature_on_two_coefficients() {
    let (t_len, k) = (15usize, 2usize);
    let sigma_y2 = 1.0;
    let mut rng = ChaCha20Rng::seed_from_u64(777);

    let x = DMatrix::from_fn(t_len, k, |i, j| {
        let a = ((i * 13 + 5) % 9) as f64 / 4.0 - 1.0;
        if j == 0 {
            a
        } else {
            0.4 * a + ((i * 7 + 2) % 11) as f64 / 5.0 - 1.0
        }
    });
    let beta_true = DVector::from_vec(vec![1.0, 0.0]);
    let y = &x * &beta_true
        + DVector::from_fn(t_len, |_, _| rng.sample::<f64, _>(StandardNormal));

    // --- gibbs chain over (beta, scales), sigma fixed -----------------------
    let sweeps = 400_000usize;
    let burn = 10_000usize;
    let mut hs = HorseshoeState::init(k);
    let mut sum = DVector::zeros(k);
    for it in 0..sweeps {
        let beta = sample_beta_horseshoe(&y, &x, &hs, sigma_y2, &mut rng).unwrap();
        hs = sample_horseshoe_scales(&beta, sigma_y2, &hs, &mut rng);
        if it >= burn {
            sum += &beta;
        }
    }
    let gibbs_mean = sum / (sweeps - burn) as f64;

    // --- quadrature oracle over (lambda1^2, lambda2^2, nu^2) ----------------
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let n_nodes = 80usize;
    let (log_lo, log_hi) = (-16.0f64, 12.0f64);
    let step = (log_hi - log_lo) / (n_nodes as f64 - 1.0);
    let nodes: Vec<f64> = (0..n_nodes).map(|i| (log_lo + i as f64 * step).exp()).collect();

    let mut weight_sum = 0.0;
    let mut mean_acc = DVector::zeros(k);
    let mut log_weights: Vec<(f64, DVector<f64>)> = Vec::with_capacity(n_nodes.pow(3));
    for &l1 in &nodes {
        for &l2 in &nodes {
            for &nu in &nodes {
                // conditional posterior of beta given scales
                let mut a = xtx.clone();
                a[(0, 0)] += 1.0 / (nu * l1);
                a[(1, 1)] += 1.0 / (nu * l2);
                let det_a = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
                let inv_a = DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        a[(1, 1)] / det_a,
                        -a[(0, 1)] / det_a,
                        -a[(1, 0)] / det_a,
                        a[(0, 0)] / det_a,
                    ],
                );
                let mu = &inv_a * &xty;

                // log marginal likelihood m(y | scales), coefficients out:
                // -(1/2) [ log|A| + log(v1 v2) + (y'y - y'X A^-1 X'y)/s2 ]
                // up to constants shared by all nodes
                let v1 = sigma_y2 * nu * l1;
                let v2 = sigma_y2 * nu * l2;
                let quad = (y.norm_squared() - xty.dot(&mu)) / sigma_y2;
                let log_m = -0.5 * (det_a.ln() + v1.ln() + v2.ln() + quad);

                let log_prior = squared_half_cauchy_pdf(l1).ln()
                    + squared_half_cauchy_pdf(l2).ln()
                    + squared_half_cauchy_pdf(nu).ln();
                // log-grid quadrature weight: ds = s dlog s per dimension
                let log_jacobian = l1.ln() + l2.ln() + nu.ln();
                log_weights.push((log_m + log_prior + log_jacobian, mu));
            }
        }
    }
    let max_lw = log_weights
        .iter()
        .map(|(lw, _)| *lw)
        .fold(f64::NEG_INFINITY, f64::max);
    for (lw, mu) in &log_weights {
        let w = (lw - max_lw).exp();
        weight_sum += w;
        mean_acc += mu * w;
    }
    let oracle_mean = mean_acc / weight_sum;

    for j in 0..k {
        assert!(
            (gibbs_mean[j] - oracle_mean[j]).abs() < 0.02,
            "beta[{j}]: gibbs {} vs quadrature {}",
            gibbs_mean[j],
            oracle_mean[j]
        );
    }
}
