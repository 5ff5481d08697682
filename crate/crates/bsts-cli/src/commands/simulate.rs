//! Replication study over the variance regimes and coefficient densities.

use std::path::Path;

use anyhow::Result;

use bsts_core::sim::run_table2;

use crate::config::{FileConfig, Overrides};
use crate::manifest::RunManifest;
use crate::outputs;

pub fn run(
    config_path: Option<&Path>,
    out_dir: &Path,
    preset: Option<&str>,
    overrides: &Overrides,
) -> Result<()> {
    let mut cfg = FileConfig::load(config_path)?;
    cfg.apply_overrides(overrides);
    if let Some(p) = preset {
        cfg.simulation.preset = p.to_string();
    }
    let sim = cfg.sim_config()?;

    RunManifest::new(
        "simulate",
        config_path,
        &cfg,
        out_dir,
        sim.dgp.seed,
        &[
            ("table2.csv", outputs::SCHEMA_TABLE2),
            ("table2_reps.csv", outputs::SCHEMA_TABLE2_REPS),
        ],
    )
    .write(out_dir)?;

    log::info!(
        "simulating {} regimes x {} densities x {} priors, {} reps each",
        sim.regimes.len(),
        sim.densities.len(),
        sim.priors.len(),
        sim.dgp.n_reps
    );
    let result = run_table2(&sim)?;
    outputs::write_table2(&out_dir.join("table2.csv"), &result)?;
    outputs::write_table2_reps(&out_dir.join("table2_reps.csv"), &result)?;

    let failed: usize = result.cells.iter().map(|c| c.n_failed).sum();
    println!(
        "simulate: {} cells written to {} ({} failed replications)",
        result.cells.len(),
        out_dir.display(),
        failed
    );
    Ok(())
}
