//! Regression-coefficient sampling under shrinkage priors, plus posterior
//! summaries built from the stored draws.

mod horseshoe;
mod savs;
mod ssvs;

pub use horseshoe::{
    sample_beta_horseshoe, sample_horseshoe_scales, sample_sigma2_horseshoe, HorseshoeHyper,
    HorseshoeState,
};
pub use savs::{column_norms2, savs_sparsify};
pub use ssvs::{
    pi0_posterior_params, sample_beta_ssvs, sample_delta2, sample_gamma, sample_pi0,
    sample_sigma2_ssvs, sample_ssvs_step, sigma2_posterior_params, SsvsHyper, SsvsState,
};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One kept draw of the regression block.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDraw {
    pub beta: DVector<f64>,
    /// Thresholded coefficients; populated when sparsification runs.
    pub beta_sparse: Option<DVector<f64>>,
    /// Inclusion indicators; populated under the spike-and-slab prior.
    pub gamma: Option<Vec<bool>>,
    pub sigma_y2: f64,
}

impl RegressionDraw {
    /// Invariant of the sparsified vector: zero or same sign with no larger
    /// magnitude than the raw coefficient.
    pub fn sparse_is_shrunk(&self) -> bool {
        match &self.beta_sparse {
            None => true,
            Some(phi) => phi.iter().zip(self.beta.iter()).all(|(p, b)| {
                *p == 0.0 || (p.signum() == b.signum() && p.abs() <= b.abs() + 1e-15)
            }),
        }
    }
}

/// Which notion of "included" to count across draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InclusionMode {
    /// Indicator draws from the spike-and-slab prior.
    SsvsGamma,
    /// Non-zero entries of the sparsified coefficient vector.
    SavsNonzero,
}

/// Per-variable inclusion frequency with the mean sign of included draws
/// attached (the colour weight for inclusion-probability plots: +1 all
/// positive, -1 all negative).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InclusionSummary {
    pub probability: f64,
    pub mean_sign: f64,
}

fn included(draw: &RegressionDraw, j: usize, mode: InclusionMode) -> Result<bool> {
    match mode {
        InclusionMode::SsvsGamma => draw
            .gamma
            .as_ref()
            .map(|g| g[j])
            .ok_or_else(|| Error::Data("draws carry no inclusion indicators".into())),
        InclusionMode::SavsNonzero => draw
            .beta_sparse
            .as_ref()
            .map(|p| p[j] != 0.0)
            .ok_or_else(|| Error::Data("draws carry no sparsified coefficients".into())),
    }
}

/// Inclusion frequency and mean sign per variable across stored draws.
pub fn inclusion_probabilities(
    draws: &[RegressionDraw],
    mode: InclusionMode,
) -> Result<Vec<InclusionSummary>> {
    let first = draws
        .first()
        .ok_or_else(|| Error::InvalidDimension("no stored draws".into()))?;
    let k = first.beta.len();
    let mut counts = vec![0usize; k];
    let mut sign_sums = vec![0.0f64; k];
    for draw in draws {
        if draw.beta.len() != k {
            return Err(Error::InvalidDimension(
                "draws disagree on the number of coefficients".into(),
            ));
        }
        for j in 0..k {
            if included(draw, j, mode)? {
                counts[j] += 1;
                let signed = match mode {
                    InclusionMode::SsvsGamma => draw.beta[j],
                    InclusionMode::SavsNonzero => draw.beta_sparse.as_ref().unwrap()[j],
                };
                sign_sums[j] += signed.signum();
            }
        }
    }
    let m = draws.len() as f64;
    Ok((0..k)
        .map(|j| InclusionSummary {
            probability: counts[j] as f64 / m,
            mean_sign: if counts[j] > 0 {
                sign_sums[j] / counts[j] as f64
            } else {
                0.0
            },
        })
        .collect())
}

/// Posterior distribution of model sizes: a probability vector over
/// `{0, ..., K}` counting included variables per draw.
pub fn model_size_distribution(draws: &[RegressionDraw], mode: InclusionMode) -> Result<Vec<f64>> {
    let first = draws
        .first()
        .ok_or_else(|| Error::InvalidDimension("no stored draws".into()))?;
    let k = first.beta.len();
    let mut hist = vec![0.0f64; k + 1];
    for draw in draws {
        let mut size = 0usize;
        for j in 0..k {
            if included(draw, j, mode)? {
                size += 1;
            }
        }
        hist[size] += 1.0;
    }
    let m = draws.len() as f64;
    hist.iter_mut().for_each(|h| *h /= m);
    Ok(hist)
}

/// Draw from an inverse gamma with the given shape and scale.
pub(crate) fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    // if G ~ Gamma(shape, rate = scale) then 1/G ~ InvGamma(shape, scale)
    let g = Gamma::new(shape, 1.0 / scale)
        .expect("inverse-gamma parameters must be positive")
        .sample(rng);
    1.0 / g
}

pub(crate) fn ln_normal_pdf(x: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * x * x / var
}

/// Column sums of squares of the design matrix, precomputed once per dataset
/// for the sparsification threshold.
pub(crate) fn dot_columns(x: &nalgebra::DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(x.ncols(), |j, _| x.column(j).norm_squared())
}
