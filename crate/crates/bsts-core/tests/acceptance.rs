//! Acceptance suite: each test pins one exit criterion at its stated
//! tolerance and prints a pass line (visible with `--nocapture`).
//!
//! Criterion 10 (CLI determinism) lives in the CLI crate's acceptance tests;
//! the full-scale replication grid is `criterion_6_full_scale_table` below,
//! ignored by default because it needs hours of compute:
//!
//! ```text
//! cargo test -p bsts-core --test acceptance -- --ignored criterion_6
//! ```

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use bsts_core::data::calendar::VintageCalendar;
use bsts_core::data::{build_panel, MonthlySeries, PubLag, Quarter, TransformCode, YearMonth};
use bsts_core::forecast::{
    predictive_draws, rt_crps, rt_lpds, run_realtime_evaluation, CrpsForm, EvaluationConfig,
    PredictiveDraws,
};
use bsts_core::gibbs::{run_gibbs, McmcConfig, ModelConfig, PriorKind};
use bsts_core::shrinkage::{sample_beta_horseshoe, savs_sparsify, HorseshoeState};
use bsts_core::sim::{run_table2, Density, SimStudyConfig};
use bsts_core::state::{
    observation_loglik, permute_signs, sample_states, NcssStates, ThetaParams,
};

fn pass(criterion: &str, detail: String) {
    println!("PASS {criterion}: {detail}");
}

// ---------------------------------------------------------------------------
// criterion 1: fast horseshoe sampler against the dense-Cholesky oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_fast_horseshoe_oracle() {
    let started = Instant::now();
    let (t_len, k) = (20usize, 5usize);
    let n_draws = 100_000usize;
    let mut rng = ChaCha20Rng::seed_from_u64(101);

    let x = DMatrix::from_fn(t_len, k, |i, j| {
        (((i * 7 + j * 13) % 11) as f64 - 5.0) / 3.0 + if j == 0 { 0.5 } else { 0.0 }
    });
    let y_star = DVector::from_fn(t_len, |i, _| ((i as f64) * 0.37).sin() * 2.0 + 0.3);
    let sigma_y2 = 1.3;
    let mut hs = HorseshoeState::init(k);
    hs.lambda2 = DVector::from_vec(vec![0.5, 2.0, 1.0, 0.1, 4.0]);
    hs.nu2 = 0.8;

    // dense oracle: A = X'X + (nu2 diag(lambda2))^-1, beta ~ N(A^-1 X'y*, s2 A^-1)
    let mut a = x.transpose() * &x;
    for j in 0..k {
        a[(j, j)] += 1.0 / (hs.nu2 * hs.lambda2[j]);
    }
    let cov = sigma_y2 * a.clone().try_inverse().unwrap();
    let mean = a.try_inverse().unwrap() * (x.transpose() * &y_star);

    let mut sum = DVector::zeros(k);
    let mut cross = DMatrix::zeros(k, k);
    for _ in 0..n_draws {
        let b = sample_beta_horseshoe(&y_star, &x, &hs, sigma_y2, &mut rng).unwrap();
        sum += &b;
        cross += &b * b.transpose();
    }
    let emp_mean = &sum / n_draws as f64;
    let emp_cov = (cross - &emp_mean * emp_mean.transpose() * n_draws as f64)
        / (n_draws as f64 - 1.0);

    for j in 0..k {
        let mc_se = (cov[(j, j)] / n_draws as f64).sqrt();
        assert!(
            (emp_mean[j] - mean[j]).abs() < 4.0 * mc_se,
            "mean[{j}]: {} vs {} (se {mc_se})",
            emp_mean[j],
            mean[j]
        );
    }
    // covariance: 5% relative error, measured against the component scale
    for i in 0..k {
        for j in 0..k {
            let scale = (cov[(i, i)] * cov[(j, j)]).sqrt();
            assert!(
                (emp_cov[(i, j)] - cov[(i, j)]).abs() < 0.05 * scale,
                "cov[{i},{j}]: {} vs {}",
                emp_cov[(i, j)],
                cov[(i, j)]
            );
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed:.1}s, budget 30s");
    pass(
        "criterion 1",
        format!("fast horseshoe sampler matches dense oracle ({elapsed:.1}s)"),
    );
}

// ---------------------------------------------------------------------------
// criterion 2: precision state sampler against explicit dense inversion
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_state_sampler_oracle() {
    let started = Instant::now();
    let t_len = 8usize;
    let n_draws = 200_000usize;
    let mut rng = ChaCha20Rng::seed_from_u64(102);

    let theta = ThetaParams {
        tau0: 0.5,
        alpha0: 0.2,
        sigma_tau: 0.9,
        sigma_alpha: -0.6,
    };
    let sigma_y2 = 1.4;
    let y_hat = DVector::from_fn(t_len, |i, _| (i as f64 * 0.8).cos() * 1.5 + 0.7);

    // independent dense construction in block ordering
    let dim = 2 * t_len;
    let mut h = DMatrix::zeros(t_len, t_len);
    for i in 0..t_len {
        h[(i, i)] = 1.0;
        if i > 0 {
            h[(i, i - 1)] = -1.0;
        }
    }
    let h2 = &h * &h;
    let mut k_block = DMatrix::zeros(dim, dim);
    k_block
        .view_mut((0, 0), (t_len, t_len))
        .copy_from(&(h.transpose() * &h));
    k_block
        .view_mut((t_len, t_len), (t_len, t_len))
        .copy_from(&(h2.transpose() * &h2));
    let (st, sa) = (theta.sigma_tau, theta.sigma_alpha);
    let mut b = DVector::zeros(dim);
    for i in 0..t_len {
        k_block[(i, i)] += st * st / sigma_y2;
        k_block[(t_len + i, t_len + i)] += sa * sa / sigma_y2;
        k_block[(i, t_len + i)] += st * sa / sigma_y2;
        k_block[(t_len + i, i)] += st * sa / sigma_y2;
        let resid = y_hat[i] - theta.tau0 - (i + 1) as f64 * theta.alpha0;
        b[i] = st / sigma_y2 * resid;
        b[t_len + i] = sa / sigma_y2 * resid;
    }
    let cov = k_block.clone().try_inverse().unwrap();
    let mean = &cov * b;

    let mut sum = DVector::zeros(dim);
    let mut cross = DMatrix::zeros(dim, dim);
    for _ in 0..n_draws {
        let s = sample_states(&y_hat, &theta, sigma_y2, &mut rng).unwrap();
        let xi = DVector::from_fn(dim, |r, _| {
            if r < t_len {
                s.tau_tilde[r]
            } else {
                s.a_tilde[r - t_len]
            }
        });
        sum += &xi;
        cross += &xi * xi.transpose();
    }
    let emp_mean = &sum / n_draws as f64;
    let emp_cov =
        (cross - &emp_mean * emp_mean.transpose() * n_draws as f64) / (n_draws as f64 - 1.0);

    let n = n_draws as f64;
    for i in 0..dim {
        let mc_se = (cov[(i, i)] / n).sqrt();
        assert!(
            (emp_mean[i] - mean[i]).abs() < 4.0 * mc_se,
            "mean[{i}]: {} vs {}",
            emp_mean[i],
            mean[i]
        );
    }
    for i in 0..dim {
        for j in 0..dim {
            let se = ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)] * cov[(i, j)]) / n).sqrt();
            assert!(
                (emp_cov[(i, j)] - cov[(i, j)]).abs() < 4.0 * se,
                "cov[{i},{j}]: {} vs {} (se {se})",
                emp_cov[(i, j)],
                cov[(i, j)]
            );
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed:.1}s, budget 30s");
    pass(
        "criterion 2",
        format!("state sampler matches dense inversion ({elapsed:.1}s)"),
    );
}

// ---------------------------------------------------------------------------
// criterion 3: spike-and-slab indicators against exhaustive enumeration
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_ssvs_enumeration_oracle() {
    use bsts_core::shrinkage::{sample_beta_ssvs, sample_gamma, SsvsState};

    let started = Instant::now();
    let (t_len, k) = (30usize, 2usize);
    let mut rng = ChaCha20Rng::seed_from_u64(103);

    // moderately correlated design, one active coefficient
    let x = DMatrix::from_fn(t_len, k, |i, j| {
        let base: f64 = ((i * 11 + 3) % 17) as f64 / 8.0 - 1.0;
        if j == 0 {
            base
        } else {
            0.6 * base + ((i * 5 + 1) % 13) as f64 / 6.0 - 1.0
        }
    });
    let beta_true = DVector::from_vec(vec![1.2, 0.0]);
    let sigma_y2 = 0.25;
    let y = &x * &beta_true
        + DVector::from_fn(t_len, |_, _| {
            0.5 * rng.sample::<f64, _>(StandardNormal)
        });

    let delta2 = DVector::from_vec(vec![1.0, 1.0]);
    let (pi0, spike) = (0.5, 1e-4);

    // chain over (gamma, beta) with everything else fixed
    let xtx = x.transpose() * &x;
    let state_template = |gamma: Vec<bool>| SsvsState {
        gamma,
        delta2: delta2.clone(),
        pi0,
        spike_factor: spike,
    };
    let mut beta = DVector::zeros(k);
    let mut counts = [0usize; 4];
    let sweeps = 200_000usize;
    let burn = 2_000usize;
    let mut gamma = vec![false; k];
    for it in 0..sweeps {
        gamma = sample_gamma(&beta, &delta2, pi0, spike, &mut rng);
        let state = state_template(gamma.clone());
        beta = sample_beta_ssvs(&y, &x, &xtx, &state, sigma_y2, &mut rng).unwrap();
        if it >= burn {
            counts[(gamma[0] as usize) * 2 + gamma[1] as usize] += 1;
        }
    }
    let kept = (sweeps - burn) as f64;

    // oracle: marginal likelihood of each of the four models in closed form
    let mut log_post = [0.0f64; 4];
    for (m, lp) in log_post.iter_mut().enumerate() {
        let g0 = m / 2 == 1;
        let g1 = m % 2 == 1;
        let v0 = if g0 { delta2[0] } else { spike * delta2[0] };
        let v1 = if g1 { delta2[1] } else { spike * delta2[1] };
        let mut sigma = DMatrix::identity(t_len, t_len) * sigma_y2;
        sigma += x.column(0) * x.column(0).transpose() * v0;
        sigma += x.column(1) * x.column(1).transpose() * v1;
        let chol = nalgebra::Cholesky::new(sigma).unwrap();
        let ldet: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        let solved = chol.solve(&y);
        let quad = y.dot(&solved);
        let n_inc = (g0 as usize + g1 as usize) as f64;
        *lp = n_inc * pi0.ln() + (2.0 - n_inc) * (1.0 - pi0).ln() - 0.5 * ldet - 0.5 * quad;
    }
    let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = log_post.iter().map(|l| (l - max).exp()).sum();
    for m in 0..4 {
        let oracle = ((log_post[m] - max).exp()) / norm;
        let chain = counts[m] as f64 / kept;
        assert!(
            (chain - oracle).abs() < 0.02,
            "model {m:02b}: chain {chain:.4} vs enumeration {oracle:.4}"
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1}s, budget 60s");
    pass(
        "criterion 3",
        format!("indicator chain matches 4-model enumeration ({elapsed:.1}s)"),
    );
}

// ---------------------------------------------------------------------------
// criterion 4: sparsification exactness and invariants
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_savs_exactness() {
    let started = Instant::now();
    let one = |beta: f64, n2: f64| {
        savs_sparsify(
            &DVector::from_vec(vec![beta]),
            &DVector::from_vec(vec![n2]),
        )[0]
    };
    assert_eq!(one(0.0, 100.0), 0.0);
    assert_eq!(one(0.05, 100.0), 0.0);
    assert!((one(2.0, 100.0) - 1.9975).abs() < 1e-15);

    let mut rng = ChaCha20Rng::seed_from_u64(104);
    for _ in 0..10_000 {
        let beta: f64 = rng.random_range(-5.0..5.0);
        let n2: f64 = rng.random_range(1e-4..1e4);
        let phi = one(beta, n2);
        assert!(phi.abs() <= beta.abs() + 1e-12, "|phi| <= |beta|");
        assert!(phi == 0.0 || phi.signum() == beta.signum(), "sign preserved");
        let below_threshold = beta != 0.0 && beta.abs().powi(3) * n2 < 1.0;
        if below_threshold {
            assert_eq!(phi, 0.0, "beta {beta} n2 {n2} below the fixed point");
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed:.2}s, budget 1s");
    pass(
        "criterion 4",
        format!("sparsification exact on hand examples and invariants ({elapsed:.2}s)"),
    );
}

// ---------------------------------------------------------------------------
// criterion 5: desk-scale replication grid
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_desk_scale_table() {
    let started = Instant::now();
    let config = SimStudyConfig::desk(20_240_501);
    let result = run_table2(&config).unwrap();

    let mut checked_sparse = 0;
    let mut checked_dense = 0;
    for cell in &result.cells {
        assert_eq!(cell.n_failed, 0, "cell {:?} had failures", cell.prior);
        if cell.density == Density::Sparse {
            assert!(
                cell.bias >= 0.02 && cell.bias <= 0.10,
                "{} sparse ({}, {}): bias {} outside [0.02, 0.10]",
                cell.prior,
                cell.sigma_tau_true,
                cell.sigma_alpha_true,
                cell.bias
            );
            checked_sparse += 1;
        }
    }
    for (tau, alpha) in &config.regimes {
        let find = |prior: PriorKind| {
            result
                .cells
                .iter()
                .find(|c| {
                    c.prior == prior
                        && c.density == Density::Dense
                        && c.sigma_tau_true == *tau
                        && c.sigma_alpha_true == *alpha
                })
                .unwrap()
        };
        let hs = find(PriorKind::Horseshoe);
        let ssvs = find(PriorKind::Ssvs);
        assert!(
            hs.bias < ssvs.bias,
            "dense ({tau}, {alpha}): horseshoe {} !< ssvs {}",
            hs.bias,
            ssvs.bias
        );
        checked_dense += 1;
    }

    // density-ratio direction for the horseshoe: above one iff the true
    // standard deviation is 0.5, in at least 8 of 10 replications per cell
    for cell in result
        .cells
        .iter()
        .filter(|c| c.prior == PriorKind::Horseshoe)
    {
        let ok_tau = cell
            .reps
            .iter()
            .filter(|r| r.error.is_none())
            .filter(|r| (r.ds_tau > 1.0) == (cell.sigma_tau_true > 0.0))
            .count();
        let ok_alpha = cell
            .reps
            .iter()
            .filter(|r| r.error.is_none())
            .filter(|r| (r.ds_alpha > 1.0) == (cell.sigma_alpha_true > 0.0))
            .count();
        assert!(
            ok_tau >= 8,
            "{} ({}, {}): sigma_tau direction correct in only {ok_tau}/10",
            cell.density,
            cell.sigma_tau_true,
            cell.sigma_alpha_true
        );
        assert!(
            ok_alpha >= 8,
            "{} ({}, {}): sigma_alpha direction correct in only {ok_alpha}/10",
            cell.density,
            cell.sigma_tau_true,
            cell.sigma_alpha_true
        );
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 1800.0, "took {elapsed:.0}s, budget 1800s");
    pass(
        "criterion 5",
        format!(
            "desk grid: {checked_sparse} sparse cells in band, horseshoe beats ssvs in {checked_dense} dense regimes, density ratios directional ({elapsed:.0}s)"
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 6: full-scale replication grid (hours; run explicitly)
// ---------------------------------------------------------------------------

#[test]
#[ignore = "hours of compute; run with --ignored"]
fn criterion_6_full_scale_table() {
    let started = Instant::now();
    let config = SimStudyConfig::full(20_240_502);
    let result = run_table2(&config).unwrap();
    for cell in &result.cells {
        if cell.density == Density::Sparse {
            assert!(
                cell.bias >= 0.034 - 0.02 && cell.bias <= 0.038 + 0.02,
                "{} sparse ({}, {}): bias {} outside 0.034..0.038 +/- 0.02",
                cell.prior,
                cell.sigma_tau_true,
                cell.sigma_alpha_true,
                cell.bias
            );
        }
    }
    pass(
        "criterion 6",
        format!(
            "full grid sparse biases inside the published band ({:.0}s)",
            started.elapsed().as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 7: closed-form score checks
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_score_closed_forms() {
    let mut rng = ChaCha20Rng::seed_from_u64(107);
    let m = 100_000usize;
    let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let pred = PredictiveDraws::new(draws, vec![0.0; m], vec![1.0; m]).unwrap();
    let crps = rt_crps(&[pred], &[0.0], CrpsForm::Proper, &mut rng).unwrap();
    assert!(
        (crps - 0.2337).abs() < 0.01,
        "crps {crps} vs closed form 0.2337"
    );

    let single = PredictiveDraws::new(vec![0.0], vec![0.0], vec![1.0]).unwrap();
    let lpds = rt_lpds(&[single], &[0.0]).unwrap();
    assert!(
        (lpds - (-0.918_938_533_204_672_7)).abs() < 1e-6,
        "lpds {lpds}"
    );
    pass(
        "criterion 7",
        format!("crps {crps:.4} ~ 0.2337, lpds {lpds:.7} ~ -0.9189385"),
    );
}

// ---------------------------------------------------------------------------
// criterion 8: sign-permutation likelihood invariance
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_sign_permutation_invariance() {
    let mut rng = ChaCha20Rng::seed_from_u64(108);
    let t_len = 25;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut theta = ThetaParams {
            tau0: rng.sample::<f64, _>(StandardNormal) * 2.0,
            alpha0: rng.sample::<f64, _>(StandardNormal) * 0.3,
            sigma_tau: rng.sample::<f64, _>(StandardNormal) * 1.5,
            sigma_alpha: rng.sample::<f64, _>(StandardNormal) * 1.5,
        };
        let mut states = NcssStates::new(
            DVector::from_fn(t_len, |_, _| rng.sample::<f64, _>(StandardNormal) * 3.0),
            DVector::from_fn(t_len, |_, _| rng.sample::<f64, _>(StandardNormal) * 3.0),
        )
        .unwrap();
        let y = DVector::from_fn(t_len, |_, _| rng.sample::<f64, _>(StandardNormal) * 2.0);
        let x_beta = DVector::from_fn(t_len, |_, _| rng.sample::<f64, _>(StandardNormal));
        let sigma_y2 = 0.1 + rng.random::<f64>() * 3.0;
        let before = observation_loglik(&y, &x_beta, &theta, &states, sigma_y2);
        permute_signs(&mut theta, &mut states, &mut rng);
        let after = observation_loglik(&y, &x_beta, &theta, &states, sigma_y2);
        worst = worst.max((before - after).abs());
    }
    assert!(worst <= 1e-10, "worst log-likelihood drift {worst}");
    pass(
        "criterion 8",
        format!("likelihood invariant under sign permutation (worst drift {worst:.2e})"),
    );
}

// ---------------------------------------------------------------------------
// criterion 9: real-time pipeline smoke test on the full release calendar
// ---------------------------------------------------------------------------

/// Synthetic monthly panel whose series names match the built-in calendar.
fn synthetic_calendar_data(
    t_total: usize,
    seed: u64,
) -> (DVector<f64>, Vec<MonthlySeries>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let names = [
        "fedfunds",
        "baa",
        "uncertainty",
        "hours",
        "unrate",
        "cpi",
        "indpro",
        "loans",
        "m2",
        "housst",
        "pce",
        "pce2",
        "construction",
        "gt_growth",
        "gt_jobs",
    ];
    let n_months = 3 * t_total;
    let start = YearMonth::new(2004, 1).unwrap();
    let mut series = Vec::with_capacity(names.len());
    for name in names {
        let mut path = Vec::with_capacity(n_months);
        let mut cur: f64 = rng.sample(StandardNormal);
        path.push(cur);
        for _ in 1..n_months {
            cur = 0.5 * cur + (0.75f64).sqrt() * rng.sample::<f64, _>(StandardNormal);
            path.push(cur);
        }
        series.push(MonthlySeries {
            name: name.to_string(),
            start,
            values: path,
            transform: TransformCode::None,
            pub_lag: PubLag::M,
        });
    }

    // strong regression signal spread across several series and months
    let signal_weight = |series_idx: usize, offset: usize| -> f64 {
        match (series_idx, offset) {
            (5, _) => 0.7,          // cpi, all three months
            (6, 0) | (6, 1) => 0.6, // indpro late months
            (13, _) => 0.8,         // search terms
            (0, 0) => 0.5,          // rates, latest month
            _ => 0.0,
        }
    };
    let y = DVector::from_fn(t_total, |t, _| {
        let months = Quarter::new(2004, 1).unwrap().plus_quarters(t as i64).months();
        let mut acc = 0.4; // level
        for (s_idx, s) in series.iter().enumerate() {
            for offset in 0..3usize {
                let w = signal_weight(s_idx, offset);
                if w != 0.0 {
                    acc += w * s.value_at(&months[2 - offset]).unwrap();
                }
            }
        }
        acc + 0.5 * rng.sample::<f64, _>(StandardNormal)
    });
    (y, series)
}

#[test]
fn criterion_9_realtime_pipeline_smoke() {
    let started = Instant::now();
    let calendar = VintageCalendar::us_gdp_schedule();
    assert_eq!(calendar.len(), 31, "the release schedule defines 31 vintages");

    let t_total = 34;
    let n_reps = 10;
    let mut rmsfe_first = Vec::with_capacity(n_reps);
    let mut rmsfe_last = Vec::with_capacity(n_reps);
    for rep in 0..n_reps {
        let (y, series) = synthetic_calendar_data(t_total, 900 + rep as u64);
        let panel = build_panel(&y, Quarter::new(2004, 1).unwrap(), &series).unwrap();

        // masked cells of the nowcast row shrink monotonically with vintage
        if rep == 0 {
            let mut prev = calendar.masked_columns(0, &panel.column_meta);
            assert_eq!(prev.len(), panel.n_columns(), "vintage 0 hides everything");
            for v in 1..calendar.len() {
                let cur = calendar.masked_columns(v, &panel.column_meta);
                assert!(cur.len() <= prev.len(), "masked set grew at vintage {v}");
                assert!(cur.iter().all(|j| prev.contains(j)));
                prev = cur;
            }
        }

        let model = ModelConfig::new(PriorKind::Horseshoe).with_mcmc(McmcConfig {
            n_iter: 700,
            n_burn: 200,
            thin: 1,
            n_chains: 1,
            seed: 7000 + rep as u64,
        });
        let eval = EvaluationConfig {
            window_start: t_total - 6,
            window_len: 6,
            include_ar2: false,
            seed: 31 + rep as u64,
            ..Default::default()
        };
        let scores = run_realtime_evaluation(
            &panel,
            &calendar,
            &[("horseshoe".to_string(), model)],
            &eval,
        )
        .unwrap();
        let s = &scores[0].scores;
        assert_eq!(s.len(), 31);
        rmsfe_first.push(s[0].rt_rmsfe);
        rmsfe_last.push(s[30].rt_rmsfe);
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let first = median(&mut rmsfe_first);
    let last = median(&mut rmsfe_last);
    assert!(
        last < first,
        "median final-vintage rmsfe {last} should beat vintage 0 ({first})"
    );
    let elapsed = started.elapsed().as_secs_f64();
    pass(
        "criterion 9",
        format!("31 vintages, monotone masking, rmsfe {first:.3} -> {last:.3} ({elapsed:.0}s)"),
    );
}

// ---------------------------------------------------------------------------
// supporting check: predictive construction consistency (used by 7 and 9)
// ---------------------------------------------------------------------------

#[test]
fn predictive_draw_mean_matches_component_means() {
    let t_len = 30;
    let mut rng = ChaCha20Rng::seed_from_u64(110);
    let y = DVector::from_fn(t_len, |i, _| 0.5 + 0.1 * (i as f64 * 0.4).sin());
    let x = DMatrix::from_fn(t_len, 2, |i, j| (((i + j * 5) % 7) as f64 - 3.0) / 2.0);
    let config = ModelConfig::new(PriorKind::Horseshoe).with_mcmc(McmcConfig {
        n_iter: 2200,
        n_burn: 200,
        thin: 1,
        n_chains: 1,
        seed: 11,
    });
    let draws = run_gibbs(&y, &x, &config).unwrap();
    let x_next = DVector::from_vec(vec![0.3, -0.2]);
    let pred = predictive_draws(&draws, &x_next, &mut rng).unwrap();
    let mean_of_means =
        pred.cond_means.iter().sum::<f64>() / pred.cond_means.len() as f64;
    let avg_sd = (pred.cond_vars.iter().sum::<f64>() / pred.cond_vars.len() as f64).sqrt();
    let mc_se = avg_sd / (pred.len() as f64).sqrt();
    assert!(
        (pred.mean() - mean_of_means).abs() < 4.0 * mc_se,
        "draw mean {} vs component mean {}",
        pred.mean(),
        mean_of_means
    );
}
