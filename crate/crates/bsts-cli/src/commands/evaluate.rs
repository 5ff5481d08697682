//! Rolling pseudo-real-time evaluation.

use std::path::Path;

use anyhow::Result;

use bsts_core::forecast::{run_realtime_evaluation, EvaluationConfig};
use bsts_core::Error;

use crate::commands::load_data;
use crate::config::{FileConfig, Overrides};
use crate::manifest::RunManifest;
use crate::outputs;

pub fn run(config_path: Option<&Path>, out_dir: &Path, overrides: &Overrides) -> Result<()> {
    let mut cfg = FileConfig::load(config_path)?;
    cfg.apply_overrides(overrides);

    RunManifest::new(
        "evaluate",
        config_path,
        &cfg,
        out_dir,
        cfg.mcmc.seed,
        &[("scores.csv", outputs::SCHEMA_SCORES)],
    )
    .write(out_dir)?;

    let data = load_data(&cfg)?;
    let t_len = data.panel.t_len();
    let start = cfg.evaluation.training_quarters;
    if start >= t_len {
        return Err(Error::Config(format!(
            "training window ({start} quarters) leaves no evaluation quarters (panel has {t_len})"
        ))
        .into());
    }
    let window_len = cfg
        .evaluation
        .eval_quarters
        .unwrap_or(t_len - start)
        .min(t_len - start);

    let models = cfg
        .evaluation
        .models
        .iter()
        .map(|name| Ok((name.clone(), cfg.model_config_for(name)?)))
        .collect::<Result<Vec<_>>>()?;
    let eval = EvaluationConfig {
        window_start: start,
        window_len,
        include_ar2: cfg.evaluation.include_ar2,
        n_ar_draws: cfg.model_config()?.mcmc.kept_per_chain().max(2),
        crps_form: cfg.crps_form()?,
        seed: cfg.mcmc.seed,
    };
    log::info!(
        "evaluating {} models over {} origins x {} vintages",
        models.len(),
        window_len,
        data.calendar.len()
    );
    let scores = run_realtime_evaluation(&data.panel, &data.calendar, &models, &eval)?;
    outputs::write_scores(&out_dir.join("scores.csv"), &scores)?;

    println!(
        "evaluate: {} models x {} vintages written to {}",
        scores.len(),
        data.calendar.len(),
        out_dir.display()
    );
    Ok(())
}
