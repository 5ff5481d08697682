//! Hierarchical spike-and-slab prior: a two-component normal mixture with
//! Bernoulli inclusion indicators, a Beta prior on the inclusion probability
//! and inverse-gamma slab variances.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::{ln_normal_pdf, sample_inverse_gamma};
use crate::error::{Error, Result};
use crate::linalg::{PrecisionGaussian, PrecisionMatrix};

/// Current state of the spike-and-slab hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct SsvsState {
    /// Inclusion indicators.
    pub gamma: Vec<bool>,
    /// Slab variances, one per coefficient.
    pub delta2: DVector<f64>,
    /// Prior inclusion probability, itself sampled.
    pub pi0: f64,
    /// Spike variance as a fraction of the slab variance; small.
    pub spike_factor: f64,
}

impl SsvsState {
    pub fn init(k: usize, spike_factor: f64) -> Self {
        Self {
            gamma: vec![false; k],
            delta2: DVector::from_element(k, 1.0),
            pi0: 0.5,
            spike_factor,
        }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn n_included(&self) -> usize {
        self.gamma.iter().filter(|g| **g).count()
    }

    /// Prior variance of coefficient `j` given its indicator.
    pub fn prior_variance(&self, j: usize) -> f64 {
        if self.gamma[j] {
            self.delta2[j]
        } else {
            self.spike_factor * self.delta2[j]
        }
    }
}

/// Hyperparameters of the spike-and-slab hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsvsHyper {
    /// Slab variance prior: inverse-gamma shape.
    pub a1: f64,
    /// Slab variance prior: inverse-gamma scale.
    pub a2: f64,
    /// Inclusion-probability prior: Beta(b1, b2).
    pub b1: f64,
    /// Inclusion-probability prior: Beta(b1, b2).
    pub b2: f64,
    /// Spike-to-slab variance ratio.
    pub spike_factor: f64,
    /// Observation-variance prior: inverse-gamma shape.
    pub sigma_shape: f64,
    /// Observation-variance prior: inverse-gamma scale.
    pub sigma_scale: f64,
}

impl Default for SsvsHyper {
    /// Weakly informative slab, flat Beta on the inclusion probability so any
    /// expected model size is possible a priori.
    fn default() -> Self {
        Self {
            a1: 5.0,
            a2: 4.0,
            b1: 1.0,
            b2: 1.0,
            spike_factor: 1e-4,
            sigma_shape: 0.01,
            sigma_scale: 0.01,
        }
    }
}

impl SsvsHyper {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.a1,
            self.a2,
            self.b1,
            self.b2,
            self.spike_factor,
            self.sigma_shape,
            self.sigma_scale,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config(
                "spike-and-slab hyperparameters must all be positive".into(),
            ));
        }
        if self.spike_factor >= 1.0 {
            return Err(Error::Config(format!(
                "spike factor must be < 1, got {}",
                self.spike_factor
            )));
        }
        Ok(())
    }
}

/// Indicator update: Bernoulli on the ratio of the two normal ordinates of
/// the current coefficient, computed in log space.
pub fn sample_gamma<R: Rng + ?Sized>(
    beta: &DVector<f64>,
    delta2: &DVector<f64>,
    pi0: f64,
    spike_factor: f64,
    rng: &mut R,
) -> Vec<bool> {
    let k = beta.len();
    let mut gamma = vec![false; k];
    for j in 0..k {
        let ln_slab = pi0.ln() + ln_normal_pdf(beta[j], delta2[j]);
        let ln_spike = (1.0 - pi0).ln() + ln_normal_pdf(beta[j], spike_factor * delta2[j]);
        let p_slab = 1.0 / (1.0 + (ln_spike - ln_slab).exp());
        gamma[j] = rng.random::<f64>() < p_slab;
    }
    gamma
}

/// Beta parameters of the inclusion-probability update:
/// `(b1 + n1, b2 + K - n1)` with `n1` the number of included variables.
pub fn pi0_posterior_params(gamma: &[bool], b1: f64, b2: f64) -> (f64, f64) {
    let n1 = gamma.iter().filter(|g| **g).count() as f64;
    (b1 + n1, b2 + gamma.len() as f64 - n1)
}

/// Draw the prior inclusion probability from its Beta conditional.
pub fn sample_pi0<R: Rng + ?Sized>(gamma: &[bool], b1: f64, b2: f64, rng: &mut R) -> f64 {
    let (a, b) = pi0_posterior_params(gamma, b1, b2);
    let draw = Beta::new(a, b).expect("beta parameters positive").sample(rng);
    draw.clamp(1e-10, 1.0 - 1e-10)
}

/// Joint coefficient draw from `N(A^{-1} X'y*/sigma_y2, A^{-1})` with
/// `A = X'X/sigma_y2 + D^{-1}` and `D` the indicator-scaled prior variances.
///
/// `xtx` is `X'X`, precomputed once per dataset.
pub fn sample_beta_ssvs<R: Rng + ?Sized>(
    y_star: &DVector<f64>,
    x: &DMatrix<f64>,
    xtx: &DMatrix<f64>,
    state: &SsvsState,
    sigma_y2: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let k = x.ncols();
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    if state.len() != k || xtx.nrows() != k {
        return Err(Error::InvalidDimension(
            "spike-and-slab state does not match the design".into(),
        ));
    }
    let mut precision = xtx / sigma_y2;
    for j in 0..k {
        precision[(j, j)] += 1.0 / state.prior_variance(j);
    }
    let shift = x.transpose() * y_star / sigma_y2;
    PrecisionGaussian::new(PrecisionMatrix::Dense(precision), shift)?.sample(rng)
}

/// Hierarchical slab-variance update: conjugate inverse gamma given the
/// coefficient and its component.
pub fn sample_delta2<R: Rng + ?Sized>(
    beta: &DVector<f64>,
    gamma: &[bool],
    a1: f64,
    a2: f64,
    spike_factor: f64,
    rng: &mut R,
) -> DVector<f64> {
    DVector::from_fn(beta.len(), |j, _| {
        let v = if gamma[j] { 1.0 } else { spike_factor };
        sample_inverse_gamma(a1 + 0.5, a2 + beta[j] * beta[j] / (2.0 * v), rng)
    })
}

/// Inverse-gamma parameters of the observation-variance update:
/// shape `c + T/2`, scale `C + (y* - X beta)'(y* - X beta)/2`.
pub fn sigma2_posterior_params(
    y_star: &DVector<f64>,
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    shape0: f64,
    scale0: f64,
) -> (f64, f64) {
    let resid = y_star - x * beta;
    (
        shape0 + y_star.len() as f64 / 2.0,
        scale0 + 0.5 * resid.norm_squared(),
    )
}

/// Observation-variance draw for the spike-and-slab model.
pub fn sample_sigma2_ssvs<R: Rng + ?Sized>(
    y_star: &DVector<f64>,
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    shape0: f64,
    scale0: f64,
    rng: &mut R,
) -> f64 {
    let (shape, scale) = sigma2_posterior_params(y_star, x, beta, shape0, scale0);
    sample_inverse_gamma(shape, scale, rng)
}

/// One full sweep of the spike-and-slab block: indicators, inclusion
/// probability, coefficients, observation variance, then the hierarchical
/// slab variances.
///
/// `beta_prev` is last sweep's coefficient draw (the indicator ordinates
/// condition on it). Returns the new coefficient draw, the updated state and
/// the new observation variance.
#[allow(clippy::too_many_arguments)]
pub fn sample_ssvs_step<R: Rng + ?Sized>(
    y_star: &DVector<f64>,
    x: &DMatrix<f64>,
    xtx: &DMatrix<f64>,
    beta_prev: &DVector<f64>,
    state: &SsvsState,
    sigma_y2: f64,
    hyper: &SsvsHyper,
    rng: &mut R,
) -> Result<(DVector<f64>, SsvsState, f64)> {
    let gamma = sample_gamma(beta_prev, &state.delta2, state.pi0, state.spike_factor, rng);
    let pi0 = sample_pi0(&gamma, hyper.b1, hyper.b2, rng);
    let mid = SsvsState {
        gamma,
        delta2: state.delta2.clone(),
        pi0,
        spike_factor: state.spike_factor,
    };
    let beta = sample_beta_ssvs(y_star, x, xtx, &mid, sigma_y2, rng)?;
    let sigma_y2 = sample_sigma2_ssvs(
        y_star,
        x,
        &beta,
        hyper.sigma_shape,
        hyper.sigma_scale,
        rng,
    );
    let delta2 = sample_delta2(
        &beta,
        &mid.gamma,
        hyper.a1,
        hyper.a2,
        mid.spike_factor,
        rng,
    );
    Ok((
        beta,
        SsvsState {
            gamma: mid.gamma,
            delta2,
            pi0: mid.pi0,
            spike_factor: mid.spike_factor,
        },
        sigma_y2,
    ))
}
