//! The Gibbs sampler tying states, trend parameters and regression priors
//! together, plus storage of the kept draws.
//!
//! Each sweep runs, in order: the joint state draw, the theta draw, the
//! random sign permutation, the prior-specific coefficient block (with
//! optional sparsification), and the observation-variance update. Chains are
//! independent and own their RNG stream, so runs are reproducible regardless
//! of thread scheduling.

pub mod store;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shrinkage::{
    column_norms2, sample_beta_horseshoe, sample_horseshoe_scales, sample_sigma2_horseshoe,
    sample_ssvs_step, savs_sparsify, HorseshoeHyper, HorseshoeState, RegressionDraw, SsvsHyper,
    SsvsState,
};
use crate::state::{
    collapsed_scale_move, permute_signs, reconstruct_trend, sample_states, sample_theta,
    sample_trend_at, NcssStates, StatePriorConfig, StatePriorCovariances, ThetaParams,
};

/// Which regression prior drives step 4 of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    Ssvs,
    Horseshoe,
    HorseshoeSavs,
}

impl PriorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PriorKind::Ssvs => "ssvs",
            PriorKind::Horseshoe => "horseshoe",
            PriorKind::HorseshoeSavs => "horseshoe-savs",
        }
    }
}

impl std::fmt::Display for PriorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssvs" => Ok(PriorKind::Ssvs),
            "horseshoe" => Ok(PriorKind::Horseshoe),
            "horseshoe-savs" => Ok(PriorKind::HorseshoeSavs),
            other => Err(Error::Config(format!(
                "unknown prior '{other}' (expected ssvs | horseshoe | horseshoe-savs)"
            ))),
        }
    }
}

/// Chain length, burn-in, thinning and seeding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub n_iter: usize,
    pub n_burn: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_iter: 15_000,
            n_burn: 5_000,
            thin: 5,
            n_chains: 2,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter <= self.n_burn {
            return Err(Error::Config(format!(
                "n_iter ({}) must exceed n_burn ({})",
                self.n_iter, self.n_burn
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be >= 1".into()));
        }
        if (self.n_iter - self.n_burn) % self.thin != 0 {
            return Err(Error::Config(format!(
                "kept iterations ({}) must divide evenly by thin ({})",
                self.n_iter - self.n_burn,
                self.thin
            )));
        }
        if self.n_chains == 0 {
            return Err(Error::Config("n_chains must be >= 1".into()));
        }
        Ok(())
    }

    /// Stored draws per chain.
    pub fn kept_per_chain(&self) -> usize {
        (self.n_iter - self.n_burn) / self.thin
    }
}

/// Hyperparameter blocks for both priors; only the configured one is used.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PriorHyper {
    #[serde(default)]
    pub horseshoe: HorseshoeHyper,
    #[serde(default)]
    pub ssvs: SsvsHyper,
}

/// Everything the sampler needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub prior_kind: PriorKind,
    pub mcmc: McmcConfig,
    pub state_prior: StatePriorConfig,
    #[serde(default)]
    pub prior_hyper: PriorHyper,
}

impl ModelConfig {
    pub fn new(prior_kind: PriorKind) -> Self {
        Self {
            prior_kind,
            mcmc: McmcConfig::default(),
            state_prior: StatePriorConfig::default(),
            prior_hyper: PriorHyper::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mcmc.validate()?;
        self.state_prior.validate()?;
        self.prior_hyper.ssvs.validate()?;
        Ok(())
    }

    /// Same model, different MCMC budget.
    pub fn with_mcmc(mut self, mcmc: McmcConfig) -> Self {
        self.mcmc = mcmc;
        self
    }
}

/// Prior-specific scale state stored with each kept draw.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleDraw {
    Horseshoe(HorseshoeState),
    Ssvs(SsvsState),
}

/// Kept draws of one chain; all streams share the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub states: Vec<NcssStates>,
    pub theta: Vec<ThetaParams>,
    pub regression: Vec<RegressionDraw>,
    pub scales: Vec<ScaleDraw>,
}

impl ChainDraws {
    fn with_capacity(n: usize) -> Self {
        Self {
            states: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            regression: Vec::with_capacity(n),
            scales: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Full posterior output of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub prior_kind: PriorKind,
    /// Number of in-sample periods.
    pub t_len: usize,
    /// Number of regression columns.
    pub n_columns: usize,
    pub chains: Vec<ChainDraws>,
}

impl PosteriorDraws {
    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn kept_per_chain(&self) -> usize {
        self.chains.first().map_or(0, |c| c.len())
    }

    pub fn total_kept(&self) -> usize {
        self.chains.iter().map(|c| c.len()).sum()
    }

    /// Theta draws pooled across chains.
    pub fn theta_draws(&self) -> impl Iterator<Item = &ThetaParams> {
        self.chains.iter().flat_map(|c| c.theta.iter())
    }

    /// Regression draws pooled across chains.
    pub fn regression_draws(&self) -> impl Iterator<Item = &RegressionDraw> {
        self.chains.iter().flat_map(|c| c.regression.iter())
    }

    /// State draws pooled across chains, paired with their theta draw.
    pub fn state_draws(&self) -> impl Iterator<Item = (&ThetaParams, &NcssStates)> {
        self.chains
            .iter()
            .flat_map(|c| c.theta.iter().zip(c.states.iter()))
    }

    pub fn sigma_tau_draws(&self) -> Vec<f64> {
        self.theta_draws().map(|t| t.sigma_tau).collect()
    }

    pub fn sigma_alpha_draws(&self) -> Vec<f64> {
        self.theta_draws().map(|t| t.sigma_alpha).collect()
    }

    /// Posterior mean of the coefficients; `sparse` switches to the
    /// thresholded draws (an error if none were stored).
    pub fn beta_posterior_mean(&self, sparse: bool) -> Result<DVector<f64>> {
        let mut sum = DVector::zeros(self.n_columns);
        let mut count = 0usize;
        for draw in self.regression_draws() {
            if sparse {
                let phi = draw.beta_sparse.as_ref().ok_or_else(|| {
                    Error::Data("no sparsified draws stored for this prior".into())
                })?;
                sum += phi;
            } else {
                sum += &draw.beta;
            }
            count += 1;
        }
        if count == 0 {
            return Err(Error::InvalidDimension("no stored draws".into()));
        }
        Ok(sum / count as f64)
    }

    /// Collected regression draws (cloned) for the summary helpers.
    pub fn regression_vec(&self) -> Vec<RegressionDraw> {
        self.regression_draws().cloned().collect()
    }
}

/// Step labels reported to observers; used to assert sweep order in tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GibbsStep {
    States,
    Theta,
    SignPermutation,
    Regression,
    Variance,
}

/// Run all configured chains and pool the kept draws.
///
/// Chains run in parallel; chain `c` uses RNG stream `c` of the configured
/// seed, so output is identical no matter how threads are scheduled.
pub fn run_gibbs(y: &DVector<f64>, x: &DMatrix<f64>, config: &ModelConfig) -> Result<PosteriorDraws> {
    config.validate()?;
    check_inputs(y, x)?;
    let chains: Vec<ChainDraws> = (0..config.mcmc.n_chains)
        .into_par_iter()
        .map(|c| run_single_chain(y, x, config, c, &mut |_, _| {}))
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorDraws {
        prior_kind: config.prior_kind,
        t_len: y.len(),
        n_columns: x.ncols(),
        chains,
    })
}

fn check_inputs(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<()> {
    if y.len() != x.nrows() {
        return Err(Error::InvalidDimension(format!(
            "y has {} periods but X has {} rows",
            y.len(),
            x.nrows()
        )));
    }
    if y.len() < 3 {
        return Err(Error::InvalidDimension(
            "estimation needs at least 3 periods".into(),
        ));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("y contains missing or non-finite values".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("X contains missing or non-finite values".into()));
    }
    Ok(())
}

/// Run one chain, reporting each completed step to `observer`. Exposed for
/// diagnostics and the step-order tests; `run_gibbs` is the normal entry.
pub fn run_single_chain(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    config: &ModelConfig,
    chain: usize,
    observer: &mut dyn FnMut(usize, GibbsStep),
) -> Result<ChainDraws> {
    let t_len = y.len();
    let k = x.ncols();
    let mcmc = &config.mcmc;
    let mut rng = ChaCha20Rng::seed_from_u64(mcmc.seed);
    rng.set_stream(chain as u64);

    // Initial values: intercepts at the prior mean, beta at zero, scales at
    // one; states are drawn first thing each sweep. The state standard
    // deviations start at their prior sd rather than the prior mean of zero:
    // at zero the first state draw is a pure prior path whose accidental
    // alignment with the data would decide which block captures the trend.
    let prior = &config.state_prior;
    let mut theta = ThetaParams {
        tau0: prior.mean[0],
        alpha0: prior.mean[1],
        sigma_tau: if prior.mean[2] != 0.0 {
            prior.mean[2]
        } else {
            prior.var[2].sqrt()
        },
        sigma_alpha: if prior.mean[3] != 0.0 {
            prior.mean[3]
        } else {
            prior.var[3].sqrt()
        },
    };
    let mut states: NcssStates;
    let mut beta = DVector::zeros(k);
    let mut sigma_y2 = 1.0;
    let mut hs_state = HorseshoeState::init(k);
    let mut ssvs_state = SsvsState::init(k, config.prior_hyper.ssvs.spike_factor);

    let xtx = if config.prior_kind == PriorKind::Ssvs {
        Some(x.transpose() * x)
    } else {
        None
    };
    let col_norms2 = if config.prior_kind == PriorKind::HorseshoeSavs {
        Some(column_norms2(x))
    } else {
        None
    };

    let state_covs = StatePriorCovariances::new(t_len).map_err(|e| e.in_chain(chain, 0))?;

    let mut out = ChainDraws::with_capacity(mcmc.kept_per_chain());
    for iter in 0..mcmc.n_iter {
        let step = |e: Error| e.in_chain(chain, iter);

        // 1. states, preceded by a collapsed re-draw of the state scales
        // (paths integrated out) so the level/drift allocation can jump
        // between modes; the pair forms one partially collapsed block
        let y_hat = y - x * &beta;
        collapsed_scale_move(
            &y_hat,
            &mut theta,
            sigma_y2,
            &config.state_prior,
            &state_covs,
            2,
            &mut rng,
        );
        states = sample_states(&y_hat, &theta, sigma_y2, &mut rng).map_err(step)?;
        observer(iter, GibbsStep::States);

        // 2. theta
        let x_beta = x * &beta;
        theta = sample_theta(y, &x_beta, &states, sigma_y2, &config.state_prior, &mut rng)
            .map_err(step)?;
        observer(iter, GibbsStep::Theta);

        // 3. sign permutation
        permute_signs(&mut theta, &mut states, &mut rng);
        observer(iter, GibbsStep::SignPermutation);

        // 4./5. regression block and observation variance
        let trend = reconstruct_trend(&theta, &states);
        let y_star = y - trend;
        let mut beta_sparse = None;
        let mut gamma = None;
        match config.prior_kind {
            PriorKind::Horseshoe | PriorKind::HorseshoeSavs => {
                beta = sample_beta_horseshoe(&y_star, x, &hs_state, sigma_y2, &mut rng)
                    .map_err(step)?;
                hs_state = sample_horseshoe_scales(&beta, sigma_y2, &hs_state, &mut rng);
                if let Some(norms) = &col_norms2 {
                    beta_sparse = Some(savs_sparsify(&beta, norms));
                }
                observer(iter, GibbsStep::Regression);
                sigma_y2 = sample_sigma2_horseshoe(
                    &y_star,
                    x,
                    &beta,
                    &hs_state,
                    &config.prior_hyper.horseshoe,
                    &mut rng,
                );
                observer(iter, GibbsStep::Variance);
            }
            PriorKind::Ssvs => {
                let (b, s, v) = sample_ssvs_step(
                    &y_star,
                    x,
                    xtx.as_ref().expect("precomputed for ssvs"),
                    &beta,
                    &ssvs_state,
                    sigma_y2,
                    &config.prior_hyper.ssvs,
                    &mut rng,
                )
                .map_err(step)?;
                beta = b;
                gamma = Some(s.gamma.clone());
                ssvs_state = s;
                observer(iter, GibbsStep::Regression);
                sigma_y2 = v;
                observer(iter, GibbsStep::Variance);
            }
        }

        // abort on any non-finite draw rather than let it poison the chain
        if !theta.is_finite()
            || !(sigma_y2.is_finite() && sigma_y2 > 0.0)
            || beta.iter().any(|b| !b.is_finite())
            || states.tau_tilde.iter().any(|v| !v.is_finite())
            || states.a_tilde.iter().any(|v| !v.is_finite())
        {
            return Err(Error::Numerical("non-finite draw".into()).in_chain(chain, iter));
        }

        if iter >= mcmc.n_burn && (iter - mcmc.n_burn) % mcmc.thin == 0 {
            out.states.push(states.clone());
            out.theta.push(theta);
            out.regression.push(RegressionDraw {
                beta: beta.clone(),
                beta_sparse,
                gamma,
                sigma_y2,
            });
            out.scales.push(match config.prior_kind {
                PriorKind::Ssvs => ScaleDraw::Ssvs(ssvs_state.clone()),
                _ => ScaleDraw::Horseshoe(hs_state.clone()),
            });
        }
    }
    Ok(out)
}

/// Minimum training window before the sequential one-step errors start.
const ONESTEP_WARMUP: usize = 8;

/// Cumulative absolute one-step-ahead prediction errors, produced by
/// sequentially re-estimating on an expanding window.
///
/// The model is refit every `refit_stride` steps and reused in between, with
/// the stored state paths extended by the required number of random-walk
/// steps. Returns the cumulative error path for targets
/// `y[warmup], ..., y[T-1]` (warmup is 8 periods).
pub fn insample_onestep_errors(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    config: &ModelConfig,
    refit_stride: usize,
) -> Result<Vec<f64>> {
    if refit_stride == 0 {
        return Err(Error::Config("refit_stride must be >= 1".into()));
    }
    config.validate()?;
    check_inputs(y, x)?;
    let t_total = y.len();
    if t_total <= ONESTEP_WARMUP {
        return Err(Error::InvalidDimension(format!(
            "sequential errors need more than {ONESTEP_WARMUP} periods, got {t_total}"
        )));
    }

    let mut path = Vec::with_capacity(t_total - ONESTEP_WARMUP);
    let mut cumulative = 0.0;
    let mut fit: Option<(usize, PosteriorDraws)> = None;
    for target in ONESTEP_WARMUP..t_total {
        let needs_refit = match &fit {
            None => true,
            Some((origin, _)) => target - origin >= refit_stride,
        };
        if needs_refit {
            let y_train = DVector::from_fn(target, |i, _| y[i]);
            let x_train = x.rows(0, target).into_owned();
            fit = Some((target, run_gibbs(&y_train, &x_train, config)?));
        }
        let (origin, draws) = fit.as_ref().expect("fit populated above");
        let horizon = target + 1 - origin;

        // deterministic stream per target for the state extensions
        let mut rng = ChaCha20Rng::seed_from_u64(config.mcmc.seed);
        rng.set_stream(0x0100_0000u64 + target as u64);

        let x_row = x.row(target).transpose();
        let mut pred_sum = 0.0;
        let mut count = 0usize;
        for chain in &draws.chains {
            for (theta, states, reg) in itertools_zip(&chain.theta, &chain.states, &chain.regression)
            {
                let trend = sample_trend_at(theta, states, horizon, &mut rng);
                pred_sum += trend + x_row.dot(&reg.beta);
                count += 1;
            }
        }
        let pred_mean = pred_sum / count as f64;
        cumulative += (y[target] - pred_mean).abs();
        path.push(cumulative);
    }
    Ok(path)
}

fn itertools_zip<'a>(
    theta: &'a [ThetaParams],
    states: &'a [NcssStates],
    regression: &'a [RegressionDraw],
) -> impl Iterator<Item = (&'a ThetaParams, &'a NcssStates, &'a RegressionDraw)> {
    theta
        .iter()
        .zip(states.iter())
        .zip(regression.iter())
        .map(|((t, s), r)| (t, s, r))
}
