//! Per-vintage nowcasts of the quarter following the sample.

use std::path::Path;

use anyhow::Result;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use bsts_core::data::{mask_unpublished, standardise};
use bsts_core::forecast::{predictive_draws, NowcastSummary, PredictiveDraws};
use bsts_core::gibbs::run_gibbs;
use bsts_core::Error;

use crate::commands::load_data;
use crate::config::{FileConfig, Overrides};
use crate::manifest::RunManifest;
use crate::outputs;

pub fn run(
    config_path: Option<&Path>,
    out_dir: &Path,
    vintage: Option<usize>,
    all: bool,
    overrides: &Overrides,
) -> Result<()> {
    let mut cfg = FileConfig::load(config_path)?;
    cfg.apply_overrides(overrides);
    let model = cfg.model_config()?;

    RunManifest::new(
        "nowcast",
        config_path,
        &cfg,
        out_dir,
        model.mcmc.seed,
        &[
            ("nowcast.csv", outputs::SCHEMA_NOWCAST),
            ("nowcast_draws.csv", outputs::SCHEMA_NOWCAST_DRAWS),
        ],
    )
    .write(out_dir)?;

    let data = load_data(&cfg)?;
    let n_vintages = data.calendar.len();
    let vintages: Vec<usize> = if all {
        (0..n_vintages).collect()
    } else {
        let v = vintage.ok_or_else(|| {
            Error::Config("pass --vintage <id> or --all to choose vintages".into())
        })?;
        if v >= n_vintages {
            return Err(Error::Config(format!(
                "vintage {v} out of range; the calendar defines vintages 0..={}",
                n_vintages - 1
            ))
            .into());
        }
        vec![v]
    };

    let panel = standardise(&data.panel)?;
    if panel.next_x.is_none() {
        return Err(Error::Data(
            "monthly data do not cover the quarter after the sample; nothing to nowcast".into(),
        )
        .into());
    }
    log::info!(
        "nowcasting {} from {} quarters at {} vintages",
        panel.next_quarter(),
        panel.t_len(),
        vintages.len()
    );
    let draws = run_gibbs(&panel.y, &panel.x, &model)?;

    let mut rows: Vec<(NowcastSummary, String)> = Vec::with_capacity(vintages.len());
    let mut raw: Vec<(usize, PredictiveDraws)> = Vec::with_capacity(vintages.len());
    for v in &vintages {
        let masked = mask_unpublished(&panel, &data.calendar, *v)?;
        let x_next = masked.next_x.expect("masking preserves the nowcast row");
        let mut rng = ChaCha20Rng::seed_from_u64(model.mcmc.seed);
        rng.set_stream(0x4000_0000u64 + *v as u64);
        let pred = predictive_draws(&draws, &x_next, &mut rng)?;
        rows.push((
            NowcastSummary::from_draws(*v, &pred),
            data.calendar.entries()[*v].timing.clone(),
        ));
        raw.push((*v, pred));
    }

    outputs::write_nowcasts(&out_dir.join("nowcast.csv"), &rows)?;
    let raw_refs: Vec<(usize, &[f64])> = raw
        .iter()
        .map(|(v, p)| (*v, p.draws.as_slice()))
        .collect();
    outputs::write_nowcast_draws(&out_dir.join("nowcast_draws.csv"), &raw_refs)?;

    println!(
        "nowcast: {} for {} vintages written to {}",
        panel.next_quarter(),
        vintages.len(),
        out_dir.display()
    );
    Ok(())
}
