//! Horseshoe prior: half-Cauchy local and global scales on the regression
//! coefficients, sampled with the O(T^2 K) augmentation instead of a K x K
//! Cholesky.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::sample_inverse_gamma;
use crate::error::{Error, Result};

/// Scale draws are kept inside this window to stop the half-Cauchy tails from
/// overflowing downstream arithmetic; hits are counted on the state.
const SCALE_FLOOR: f64 = 1e-12;
const SCALE_CEIL: f64 = 1e12;

/// Local and global scales with their half-Cauchy auxiliary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct HorseshoeState {
    /// Local variance scales, one per coefficient.
    pub lambda2: DVector<f64>,
    /// Global variance scale.
    pub nu2: f64,
    /// Auxiliary inverse-gamma variables for the local scales.
    pub aux_local: DVector<f64>,
    /// Auxiliary inverse-gamma variable for the global scale.
    pub aux_global: f64,
    /// Number of draws pushed back inside `[1e-12, 1e12]` so far.
    pub clamp_events: u64,
}

impl HorseshoeState {
    /// Unit scales, the sampler's starting point.
    pub fn init(k: usize) -> Self {
        Self {
            lambda2: DVector::from_element(k, 1.0),
            nu2: 1.0,
            aux_local: DVector::from_element(k, 1.0),
            aux_global: 1.0,
            clamp_events: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.lambda2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda2.is_empty()
    }

    /// Prior variance multipliers `nu2 * lambda2_j` (the observation variance
    /// multiplies in separately).
    pub fn variance_multipliers(&self) -> DVector<f64> {
        &self.lambda2 * self.nu2
    }
}

/// Observation-variance prior for the horseshoe model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeHyper {
    /// Inverse-gamma shape of the observation-variance prior.
    pub sigma_shape: f64,
    /// Inverse-gamma scale of the observation-variance prior.
    pub sigma_scale: f64,
}

impl Default for HorseshoeHyper {
    fn default() -> Self {
        Self {
            sigma_shape: 0.01,
            sigma_scale: 0.01,
        }
    }
}

pub(crate) fn clamp_scale(x: f64, clamp_events: &mut u64) -> f64 {
    if !(SCALE_FLOOR..=SCALE_CEIL).contains(&x) {
        *clamp_events += 1;
        x.clamp(SCALE_FLOOR, SCALE_CEIL)
    } else {
        x
    }
}

/// Exact draw of the regression coefficients from
/// `N(A^{-1} X'y*, sigma_y2 A^{-1})` with `A = X'X + (nu2 diag(lambda2))^{-1}`.
///
/// Runs the four-step augmentation: sample `u ~ N(0, D)` and `delta ~ N(0, I)`,
/// solve one T x T system, and assemble the draw. Only `X diag(m) X' + I` is
/// ever factorised, so the cost is O(T^2 K) rather than O(K^3).
pub fn sample_beta_horseshoe<R: Rng + ?Sized>(
    y_star: &DVector<f64>,
    x: &DMatrix<f64>,
    hs: &HorseshoeState,
    sigma_y2: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let t_len = x.nrows();
    let k = x.ncols();
    if y_star.len() != t_len {
        return Err(Error::InvalidDimension(format!(
            "horseshoe: y* has length {}, X has {} rows",
            y_star.len(),
            t_len
        )));
    }
    if hs.len() != k {
        return Err(Error::InvalidDimension(format!(
            "horseshoe: {} scales for {} columns",
            hs.len(),
            k
        )));
    }
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    let sigma = sigma_y2.sqrt();
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Numerical(format!(
            "observation variance must be positive, got {sigma_y2}"
        )));
    }

    // prior variance of beta_j is sigma_y2 * m_j with m_j = nu2 * lambda2_j
    let m = hs.variance_multipliers();

    let u = DVector::from_fn(k, |j, _| {
        (sigma_y2 * m[j]).sqrt() * rng.sample::<f64, _>(StandardNormal)
    });
    let delta = DVector::from_fn(t_len, |_, _| rng.sample::<f64, _>(StandardNormal));

    // (X M X' + I) w = (y* - X u)/sigma - delta
    let mut x_scaled = x.clone();
    for j in 0..k {
        let mut col = x_scaled.column_mut(j);
        col *= m[j];
    }
    let mut system = &x_scaled * x.transpose();
    for i in 0..t_len {
        system[(i, i)] += 1.0;
    }
    let chol = nalgebra::Cholesky::new(system).ok_or_else(|| {
        Error::Numerical("horseshoe T x T system is not positive definite (non-finite scales?)".into())
    })?;
    let rhs = (y_star - x * &u) / sigma - delta;
    let w = chol.solve(&rhs);

    // beta = u + sigma * M X' w
    let xtw = x.transpose() * w;
    Ok(DVector::from_fn(k, |j, _| u[j] + sigma * m[j] * xtw[j]))
}

/// One sweep of the scale block: local scales, their auxiliaries, the global
/// scale, and its auxiliary, each from closed-form inverse-gamma conditionals
/// implied by writing the half-Cauchy priors as inverse-gamma mixtures.
pub fn sample_horseshoe_scales<R: Rng + ?Sized>(
    beta: &DVector<f64>,
    sigma_y2: f64,
    hs: &HorseshoeState,
    rng: &mut R,
) -> HorseshoeState {
    let k = hs.len();
    debug_assert_eq!(beta.len(), k);
    let mut clamp_events = hs.clamp_events;

    let mut lambda2 = DVector::zeros(k);
    let mut aux_local = DVector::zeros(k);
    for j in 0..k {
        let scale = 1.0 / hs.aux_local[j] + beta[j] * beta[j] / (2.0 * hs.nu2 * sigma_y2);
        lambda2[j] = clamp_scale(sample_inverse_gamma(1.0, scale, rng), &mut clamp_events);
        aux_local[j] = clamp_scale(
            sample_inverse_gamma(1.0, 1.0 + 1.0 / lambda2[j], rng),
            &mut clamp_events,
        );
    }

    let shrink_sum: f64 = (0..k).map(|j| beta[j] * beta[j] / lambda2[j]).sum();
    let nu2 = clamp_scale(
        sample_inverse_gamma(
            (k as f64 + 1.0) / 2.0,
            1.0 / hs.aux_global + shrink_sum / (2.0 * sigma_y2),
            rng,
        ),
        &mut clamp_events,
    );
    let aux_global = clamp_scale(
        sample_inverse_gamma(1.0, 1.0 + 1.0 / nu2, rng),
        &mut clamp_events,
    );

    HorseshoeState {
        lambda2,
        nu2,
        aux_local,
        aux_global,
        clamp_events,
    }
}

/// Observation-variance draw. The coefficient prior scales with `sigma_y2`,
/// so the conditional picks up K/2 extra shape and the prior quadratic form.
pub fn sample_sigma2_horseshoe<R: Rng + ?Sized>(
    y_star: &DVector<f64>,
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    hs: &HorseshoeState,
    hyper: &HorseshoeHyper,
    rng: &mut R,
) -> f64 {
    let t_len = y_star.len() as f64;
    let k = beta.len();
    let resid = y_star - x * beta;
    let ssr = resid.norm_squared();
    let prior_form: f64 = (0..k)
        .map(|j| beta[j] * beta[j] / (hs.nu2 * hs.lambda2[j]))
        .sum();
    let shape = hyper.sigma_shape + t_len / 2.0 + k as f64 / 2.0;
    let scale = hyper.sigma_scale + 0.5 * ssr + 0.5 * prior_form;
    sample_inverse_gamma(shape, scale, rng)
}
