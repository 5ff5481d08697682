//! Posterior-predictive nowcasts and their point/density scores, plus an
//! autoregressive benchmark.

mod realtime;

pub use realtime::{run_realtime_evaluation, EvaluationConfig, ModelScores, VintageScores};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{PosteriorDraws, PriorKind};
use crate::shrinkage::sample_inverse_gamma;
use crate::state::sample_trend_at;

/// Predictive draws for one target quarter, kept alongside their Gaussian
/// mixture components so densities can be evaluated without smoothing the
/// draws themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveDraws {
    pub draws: Vec<f64>,
    pub cond_means: Vec<f64>,
    pub cond_vars: Vec<f64>,
}

impl PredictiveDraws {
    pub fn new(draws: Vec<f64>, cond_means: Vec<f64>, cond_vars: Vec<f64>) -> Result<Self> {
        if draws.len() != cond_means.len() || draws.len() != cond_vars.len() {
            return Err(Error::InvalidDimension(
                "predictive streams differ in length".into(),
            ));
        }
        if cond_vars.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Numerical(
                "predictive component variances must be positive".into(),
            ));
        }
        Ok(Self {
            draws,
            cond_means,
            cond_vars,
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Point forecast: the mean of the predictive draws.
    pub fn mean(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.draws.len() as f64
    }

    pub fn sd(&self) -> f64 {
        let m = self.mean();
        let var = self.draws.iter().map(|d| (d - m).powi(2)).sum::<f64>()
            / (self.draws.len() as f64 - 1.0).max(1.0);
        var.sqrt()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let mut sorted = self.draws.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pos = p * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        if lo == hi {
            sorted[lo]
        } else {
            sorted[lo] * (hi as f64 - pos) + sorted[hi] * (pos - lo as f64)
        }
    }
}

/// One-step-ahead predictive draws from stored posterior output.
///
/// Per kept draw the state paths are extended one step with their unit
/// innovations, the trend is rebuilt, and the component mean/variance pair
/// `(x'beta + trend, sigma_y2)` is recorded next to the sampled value. Under
/// the sparsified prior the thresholded coefficients are the model's
/// coefficients and are used here.
pub fn predictive_draws<R: Rng + ?Sized>(
    posterior: &PosteriorDraws,
    x_next: &DVector<f64>,
    rng: &mut R,
) -> Result<PredictiveDraws> {
    if x_next.len() != posterior.n_columns {
        return Err(Error::InvalidDimension(format!(
            "nowcast row has {} columns, posterior {}",
            x_next.len(),
            posterior.n_columns
        )));
    }
    let use_sparse = posterior.prior_kind == PriorKind::HorseshoeSavs;
    let m = posterior.total_kept();
    let mut draws = Vec::with_capacity(m);
    let mut cond_means = Vec::with_capacity(m);
    let mut cond_vars = Vec::with_capacity(m);
    for chain in &posterior.chains {
        for ((theta, states), reg) in chain
            .theta
            .iter()
            .zip(chain.states.iter())
            .zip(chain.regression.iter())
        {
            let beta = if use_sparse {
                reg.beta_sparse
                    .as_ref()
                    .ok_or_else(|| Error::Data("sparsified draws missing".into()))?
            } else {
                &reg.beta
            };
            let trend = sample_trend_at(theta, states, 1, rng);
            let mean = trend + x_next.dot(beta);
            let var = reg.sigma_y2;
            draws.push(mean + var.sqrt() * rng.sample::<f64, _>(StandardNormal));
            cond_means.push(mean);
            cond_vars.push(var);
        }
    }
    PredictiveDraws::new(draws, cond_means, cond_vars)
}

/// Per-vintage predictive summary for reporting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NowcastSummary {
    pub vintage_id: usize,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

impl NowcastSummary {
    pub fn from_draws(vintage_id: usize, pred: &PredictiveDraws) -> Self {
        Self {
            vintage_id,
            mean: pred.mean(),
            sd: pred.sd(),
            q05: pred.quantile(0.05),
            q25: pred.quantile(0.25),
            q50: pred.quantile(0.50),
            q75: pred.quantile(0.75),
            q95: pred.quantile(0.95),
        }
    }
}

/// Root mean squared forecast error over the evaluation window.
pub fn rt_rmsfe(point_forecasts: &[f64], realised: &[f64]) -> Result<f64> {
    if point_forecasts.is_empty() || point_forecasts.len() != realised.len() {
        return Err(Error::InvalidDimension(format!(
            "rmsfe needs equal non-empty inputs ({} vs {})",
            point_forecasts.len(),
            realised.len()
        )));
    }
    let mse = point_forecasts
        .iter()
        .zip(realised)
        .map(|(f, y)| (f - y).powi(2))
        .sum::<f64>()
        / realised.len() as f64;
    Ok(mse.sqrt())
}

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * (x - mean).powi(2) / var
}

/// Mean log predictive density over the evaluation window, evaluated through
/// each prediction's Gaussian mixture with log-sum-exp stabilisation.
pub fn rt_lpds(preds: &[PredictiveDraws], realised: &[f64]) -> Result<f64> {
    if preds.is_empty() || preds.len() != realised.len() {
        return Err(Error::InvalidDimension(format!(
            "lpds needs equal non-empty inputs ({} vs {})",
            preds.len(),
            realised.len()
        )));
    }
    let mut total = 0.0;
    for (pred, y) in preds.iter().zip(realised) {
        if pred.is_empty() {
            return Err(Error::InvalidDimension("empty predictive".into()));
        }
        let logs: Vec<f64> = pred
            .cond_means
            .iter()
            .zip(pred.cond_vars.iter())
            .map(|(m, v)| ln_normal(*y, *m, *v))
            .collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        total += lse - (pred.len() as f64).ln();
    }
    Ok(total / realised.len() as f64)
}

/// Which weighting the sample CRPS uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CrpsForm {
    /// The strictly proper energy form `E|Y - y| - E|Y - Y'|/2`.
    #[default]
    Proper,
    /// Halves the first term as well; kept for exact replication of output
    /// produced with that variant.
    Halved,
}

/// Mean continuous ranked probability score over the evaluation window.
///
/// `E|Y - Y'|` is estimated by pairing two independent permutations of the
/// draw vector, so an RNG is required; seed it for reproducible scores.
pub fn rt_crps<R: Rng + ?Sized>(
    preds: &[PredictiveDraws],
    realised: &[f64],
    form: CrpsForm,
    rng: &mut R,
) -> Result<f64> {
    if preds.is_empty() || preds.len() != realised.len() {
        return Err(Error::InvalidDimension(format!(
            "crps needs equal non-empty inputs ({} vs {})",
            preds.len(),
            realised.len()
        )));
    }
    let mut total = 0.0;
    for (pred, y) in preds.iter().zip(realised) {
        let m = pred.len();
        if m < 2 {
            return Err(Error::InvalidDimension(
                "crps needs at least 2 predictive draws".into(),
            ));
        }
        let abs_err = pred.draws.iter().map(|d| (d - y).abs()).sum::<f64>() / m as f64;
        let mut a: Vec<usize> = (0..m).collect();
        let mut b: Vec<usize> = (0..m).collect();
        shuffle(&mut a, rng);
        shuffle(&mut b, rng);
        let spread = a
            .iter()
            .zip(b.iter())
            .map(|(i, j)| (pred.draws[*i] - pred.draws[*j]).abs())
            .sum::<f64>()
            / m as f64;
        let first = match form {
            CrpsForm::Proper => abs_err,
            CrpsForm::Halved => 0.5 * abs_err,
        };
        total += first - 0.5 * spread;
    }
    Ok(total / realised.len() as f64)
}

fn shuffle<R: Rng + ?Sized>(idx: &mut [usize], rng: &mut R) {
    for i in (1..idx.len()).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
}

/// Bayesian second-order autoregression with intercept under a diffuse
/// conjugate normal-inverse-gamma prior; returns predictive draws for the
/// next period.
pub fn ar2_baseline<R: Rng + ?Sized>(
    y: &DVector<f64>,
    n_draws: usize,
    rng: &mut R,
) -> Result<PredictiveDraws> {
    let t_len = y.len();
    if t_len < 10 {
        return Err(Error::InvalidDimension(format!(
            "autoregressive baseline needs at least 10 periods, got {t_len}"
        )));
    }
    if n_draws == 0 {
        return Err(Error::InvalidDimension("need at least one draw".into()));
    }
    let n = t_len - 2;
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => y[i + 1],
        _ => y[i],
    });
    let target = DVector::from_fn(n, |i, _| y[i + 2]);

    // prior: beta | sigma2 ~ N(0, sigma2 * v0 I), sigma2 ~ IG(s0/2, r0/2)
    let v0 = 1.0e4;
    let (shape0, scale0) = (0.01, 0.01);
    let mut a = x.transpose() * &x;
    for j in 0..3 {
        a[(j, j)] += 1.0 / v0;
    }
    let chol = match nalgebra::Cholesky::new(a.clone()) {
        Some(c) => c,
        None => {
            log::warn!("autoregressive design near-singular, ridge-stabilising");
            let ridge = 1e-6 * a.trace() / 3.0;
            for j in 0..3 {
                a[(j, j)] += ridge;
            }
            nalgebra::Cholesky::new(a)
                .ok_or_else(|| Error::Numerical("autoregressive design unusable".into()))?
        }
    };
    let xty = x.transpose() * &target;
    let mean = chol.solve(&xty);
    let shape1 = shape0 + n as f64 / 2.0;
    let scale1 = scale0 + 0.5 * (target.norm_squared() - mean.dot(&xty)).max(0.0);

    let x_next = DVector::from_vec(vec![1.0, y[t_len - 1], y[t_len - 2]]);
    let mut draws = Vec::with_capacity(n_draws);
    let mut cond_means = Vec::with_capacity(n_draws);
    let mut cond_vars = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let sigma2 = sample_inverse_gamma(shape1, scale1, rng);
        let z = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let noise = chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        let beta = &mean + noise * sigma2.sqrt();
        let cm = x_next.dot(&beta);
        draws.push(cm + sigma2.sqrt() * rng.sample::<f64, _>(StandardNormal));
        cond_means.push(cm);
        cond_vars.push(sigma2);
    }
    PredictiveDraws::new(draws, cond_means, cond_vars)
}
