//! Full-sample estimation: draw store, inclusion table, model-size
//! distribution, and the state-variance density ratios.

use std::path::Path;

use anyhow::Result;

use bsts_core::data::standardise;
use bsts_core::gibbs::{run_gibbs, store, PriorKind};
use bsts_core::shrinkage::{
    column_norms2, inclusion_probabilities, model_size_distribution, savs_sparsify, InclusionMode,
    RegressionDraw,
};
use bsts_core::state::savage_dickey;

use crate::commands::load_data;
use crate::config::{FileConfig, Overrides};
use crate::manifest::RunManifest;
use crate::outputs;

pub fn run(config_path: Option<&Path>, out_dir: &Path, overrides: &Overrides) -> Result<()> {
    let mut cfg = FileConfig::load(config_path)?;
    cfg.apply_overrides(overrides);
    let model = cfg.model_config()?;

    RunManifest::new(
        "estimate",
        config_path,
        &cfg,
        out_dir,
        model.mcmc.seed,
        &[
            ("draws.bin", outputs::SCHEMA_DRAWS),
            ("draws.json", outputs::SCHEMA_DRAWS),
            ("inclusion.csv", outputs::SCHEMA_INCLUSION),
            ("model_sizes.csv", outputs::SCHEMA_MODEL_SIZES),
            ("savage_dickey.csv", outputs::SCHEMA_SAVAGE_DICKEY),
            ("panel.csv", outputs::SCHEMA_PANEL),
        ],
    )
    .write(out_dir)?;

    let data = load_data(&cfg)?;
    let panel = standardise(&data.panel)?;
    log::info!(
        "estimating {} on {} quarters x {} columns",
        model.prior_kind,
        panel.t_len(),
        panel.n_columns()
    );
    let draws = run_gibbs(&panel.y, &panel.x, &model)?;
    store::save_draws(out_dir, &draws)?;

    // inclusion summaries: indicator draws under the spike-and-slab prior,
    // non-zero thresholded draws otherwise (computed on the fly for the plain
    // horseshoe, whose stored draws are dense)
    let (regression, mode): (Vec<RegressionDraw>, InclusionMode) = match model.prior_kind {
        PriorKind::Ssvs => (draws.regression_vec(), InclusionMode::SsvsGamma),
        PriorKind::HorseshoeSavs => (draws.regression_vec(), InclusionMode::SavsNonzero),
        PriorKind::Horseshoe => {
            let norms = column_norms2(&panel.x);
            let sparsified = draws
                .regression_vec()
                .into_iter()
                .map(|mut d| {
                    d.beta_sparse = Some(savs_sparsify(&d.beta, &norms));
                    d
                })
                .collect();
            (sparsified, InclusionMode::SavsNonzero)
        }
    };
    let labels: Vec<String> = panel.column_meta.iter().map(|m| m.label()).collect();
    let inclusion = inclusion_probabilities(&regression, mode)?;
    outputs::write_inclusion(&out_dir.join("inclusion.csv"), &labels, &inclusion)?;
    let sizes = model_size_distribution(&regression, mode)?;
    outputs::write_model_sizes(&out_dir.join("model_sizes.csv"), &sizes)?;

    let prior_var = model.state_prior.var;
    let ds_tau = savage_dickey(prior_var[2], &draws.sigma_tau_draws(), None)?;
    let ds_alpha = savage_dickey(prior_var[3], &draws.sigma_alpha_draws(), None)?;
    outputs::write_savage_dickey(
        &out_dir.join("savage_dickey.csv"),
        &[("sigma_tau", ds_tau), ("sigma_alpha", ds_alpha)],
    )?;

    outputs::write_panel(&out_dir.join("panel.csv"), &panel)?;

    println!(
        "estimate: {} kept draws across {} chains; density ratios sigma_tau={:.4} sigma_alpha={:.4}",
        draws.total_kept(),
        draws.n_chains(),
        ds_tau.ratio,
        ds_alpha.ratio
    );
    Ok(())
}
