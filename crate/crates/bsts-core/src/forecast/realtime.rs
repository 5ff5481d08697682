//! Rolling pseudo-real-time evaluation across the release calendar.
//!
//! Each rolling origin re-estimates every model on the quarters before the
//! target; within an origin the fit is reused across all vintages and only
//! the nowcast row changes through masking. Scores aggregate over origins at
//! fixed vintage.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ar2_baseline, predictive_draws, rt_crps, rt_lpds, rt_rmsfe, CrpsForm, PredictiveDraws};
use crate::data::{calendar::VintageCalendar, mask_unpublished, standardise, QuarterlyPanel};
use crate::error::{Error, Result};
use crate::gibbs::{run_gibbs, ModelConfig};

/// Point and density scores of one model at one vintage, aggregated over the
/// rolling origins.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VintageScores {
    pub vintage_id: usize,
    pub rt_rmsfe: f64,
    pub rt_lpds: f64,
    pub rt_crps: f64,
}

/// All per-vintage scores of one model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelScores {
    pub model: String,
    pub scores: Vec<VintageScores>,
}

/// Evaluation window and scoring options.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvaluationConfig {
    /// First rolling origin: the index of the first quarter to nowcast.
    pub window_start: usize,
    /// Number of rolling origins.
    pub window_len: usize,
    /// Include the autoregressive benchmark row.
    pub include_ar2: bool,
    /// Predictive draws for the benchmark.
    pub n_ar_draws: usize,
    pub crps_form: CrpsForm,
    /// Seed for predictive extensions and score permutations; estimation
    /// seeds come from each model's own configuration.
    pub seed: u64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            window_start: 0,
            window_len: 0,
            include_ar2: true,
            n_ar_draws: 2000,
            crps_form: CrpsForm::Proper,
            seed: 0,
        }
    }
}

/// The benchmark row label in evaluation output.
pub const AR2_MODEL_NAME: &str = "ar2";

/// Run the full rolling evaluation for every model (plus the benchmark) and
/// aggregate scores per vintage.
pub fn run_realtime_evaluation(
    panel: &QuarterlyPanel,
    calendar: &VintageCalendar,
    models: &[(String, ModelConfig)],
    eval: &EvaluationConfig,
) -> Result<Vec<ModelScores>> {
    let t_len = panel.t_len();
    if eval.window_len == 0 {
        return Err(Error::Config("evaluation window is empty".into()));
    }
    let last_origin = eval.window_start + eval.window_len - 1;
    if last_origin >= t_len {
        return Err(Error::Config(format!(
            "evaluation window ends at quarter {last_origin} but the panel has {t_len}"
        )));
    }
    if eval.window_start < 3 {
        return Err(Error::Config(
            "evaluation window must leave at least 3 training quarters".into(),
        ));
    }
    let origins: Vec<usize> = (eval.window_start..=last_origin).collect();
    let realised: Vec<f64> = origins.iter().map(|q| panel.y[*q]).collect();
    let n_vintages = calendar.len();

    let mut out = Vec::with_capacity(models.len() + 1);
    for (model_idx, (name, config)) in models.iter().enumerate() {
        config.validate()?;
        // per-origin fits, parallel; each origin yields one prediction per
        // vintage
        let per_origin: Vec<Vec<PredictiveDraws>> = origins
            .par_iter()
            .map(|origin| -> Result<Vec<PredictiveDraws>> {
                let sub = panel.origin_panel(*origin)?;
                let std = standardise(&sub)?;
                let draws = run_gibbs(&std.y, &std.x, config)?;
                let mut preds = Vec::with_capacity(n_vintages);
                for v in 0..n_vintages {
                    let masked = mask_unpublished(&std, calendar, v)?;
                    let x_next = masked
                        .next_x
                        .expect("masking preserves the nowcast row");
                    let mut rng = ChaCha20Rng::seed_from_u64(eval.seed);
                    rng.set_stream(stream_id(model_idx, *origin, v));
                    preds.push(predictive_draws(&draws, &x_next, &mut rng)?);
                }
                Ok(preds)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(ModelScores {
            model: name.clone(),
            scores: aggregate(&per_origin, &realised, n_vintages, eval)?,
        });
    }

    if eval.include_ar2 {
        // the benchmark sees no monthly information, so its prediction is the
        // same at every vintage of a given origin
        let per_origin: Vec<Vec<PredictiveDraws>> = origins
            .par_iter()
            .map(|origin| -> Result<Vec<PredictiveDraws>> {
                let y_train = DVector::from_fn(*origin, |i, _| panel.y[i]);
                let mut rng = ChaCha20Rng::seed_from_u64(eval.seed);
                rng.set_stream(stream_id(usize::MAX >> 22, *origin, 0));
                let pred = ar2_baseline(&y_train, eval.n_ar_draws, &mut rng)?;
                Ok(vec![pred; n_vintages])
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(ModelScores {
            model: AR2_MODEL_NAME.to_string(),
            scores: aggregate(&per_origin, &realised, n_vintages, eval)?,
        });
    }
    Ok(out)
}

fn stream_id(model: usize, origin: usize, vintage: usize) -> u64 {
    ((model as u64) << 40) ^ ((origin as u64) << 20) ^ vintage as u64
}

fn aggregate(
    per_origin: &[Vec<PredictiveDraws>],
    realised: &[f64],
    n_vintages: usize,
    eval: &EvaluationConfig,
) -> Result<Vec<VintageScores>> {
    let mut scores = Vec::with_capacity(n_vintages);
    for v in 0..n_vintages {
        let preds: Vec<PredictiveDraws> =
            per_origin.iter().map(|origin| origin[v].clone()).collect();
        let points: Vec<f64> = preds.iter().map(|p| p.mean()).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(eval.seed);
        rng.set_stream(0x2000_0000_0000u64 ^ v as u64);
        scores.push(VintageScores {
            vintage_id: v,
            rt_rmsfe: rt_rmsfe(&points, realised)?,
            rt_lpds: rt_lpds(&preds, realised)?,
            rt_crps: rt_crps(&preds, realised, eval.crps_form, &mut rng)?,
        });
    }
    Ok(scores)
}
