//! CSV output writers. Headers are part of the schema contract and are
//! pinned by golden tests; all values format deterministically.

use std::path::Path;

use anyhow::{Context, Result};

use bsts_core::data::{io::write_panel_csv, QuarterlyPanel};
use bsts_core::forecast::{ModelScores, NowcastSummary};
use bsts_core::shrinkage::InclusionSummary;
use bsts_core::sim::SimResult;
use bsts_core::state::SavageDickey;

pub const SCHEMA_INCLUSION: &str = "bsts.inclusion.v1";
pub const SCHEMA_MODEL_SIZES: &str = "bsts.model-sizes.v1";
pub const SCHEMA_SAVAGE_DICKEY: &str = "bsts.savage-dickey.v1";
pub const SCHEMA_PANEL: &str = "bsts.panel.v1";
pub const SCHEMA_NOWCAST: &str = "bsts.nowcast.v1";
pub const SCHEMA_NOWCAST_DRAWS: &str = "bsts.nowcast-draws.v1";
pub const SCHEMA_SCORES: &str = "bsts.scores.v1";
pub const SCHEMA_TABLE2: &str = "bsts.table2.v1";
pub const SCHEMA_TABLE2_REPS: &str = "bsts.table2-reps.v1";
pub const SCHEMA_DRAWS: &str = "bsts.draws.v1";

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

/// `inclusion.csv`: variables ranked by posterior inclusion probability with
/// the mean sign of included draws as the colour weight.
pub fn write_inclusion(path: &Path, labels: &[String], summary: &[InclusionSummary]) -> Result<()> {
    let mut idx: Vec<usize> = (0..summary.len()).collect();
    idx.sort_by(|a, b| {
        summary[*b]
            .probability
            .partial_cmp(&summary[*a].probability)
            .unwrap()
            .then_with(|| labels[*a].cmp(&labels[*b]))
    });
    let mut w = writer(path)?;
    w.write_record(["rank", "variable", "probability", "mean_sign"])?;
    for (rank, j) in idx.iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            labels[*j].clone(),
            format!("{}", summary[*j].probability),
            format!("{}", summary[*j].mean_sign),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `model_sizes.csv`: the posterior distribution of model sizes.
pub fn write_model_sizes(path: &Path, hist: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["size", "probability"])?;
    for (size, p) in hist.iter().enumerate() {
        w.write_record([size.to_string(), format!("{p}")])?;
    }
    w.flush()?;
    Ok(())
}

/// `savage_dickey.csv`: one density-ratio row per state standard deviation.
pub fn write_savage_dickey(path: &Path, rows: &[(&str, SavageDickey)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "parameter",
        "prior_density",
        "posterior_density",
        "ratio",
        "underflow",
    ])?;
    for (name, ds) in rows {
        w.write_record([
            name.to_string(),
            format!("{}", ds.prior_density),
            format!("{}", ds.posterior_density),
            format!("{}", ds.ratio),
            ds.denominator_underflow.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `panel.csv`: the assembled design for inspection.
pub fn write_panel(path: &Path, panel: &QuarterlyPanel) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    write_panel_csv(panel, file)?;
    Ok(())
}

/// `nowcast.csv`: per-vintage predictive summaries.
pub fn write_nowcasts(path: &Path, rows: &[(NowcastSummary, String)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "vintage", "timing", "mean", "sd", "q05", "q25", "q50", "q75", "q95",
    ])?;
    for (s, timing) in rows {
        w.write_record([
            s.vintage_id.to_string(),
            timing.clone(),
            format!("{}", s.mean),
            format!("{}", s.sd),
            format!("{}", s.q05),
            format!("{}", s.q25),
            format!("{}", s.q50),
            format!("{}", s.q75),
            format!("{}", s.q95),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `nowcast_draws.csv`: raw predictive draws per vintage.
pub fn write_nowcast_draws(path: &Path, per_vintage: &[(usize, &[f64])]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["vintage", "draw", "value"])?;
    for (vintage, draws) in per_vintage {
        for (i, d) in draws.iter().enumerate() {
            w.write_record([vintage.to_string(), i.to_string(), format!("{d}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `scores.csv`: long-format per-vintage, per-model scores.
pub fn write_scores(path: &Path, scores: &[ModelScores]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["vintage", "model", "metric", "value"])?;
    for model in scores {
        for s in &model.scores {
            for (metric, value) in [
                ("rt_rmsfe", s.rt_rmsfe),
                ("rt_lpds", s.rt_lpds),
                ("rt_crps", s.rt_crps),
            ] {
                w.write_record([
                    s.vintage_id.to_string(),
                    model.model.clone(),
                    metric.to_string(),
                    format!("{value}"),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn regime_label(density: bsts_core::sim::Density, tau: f64, alpha: f64) -> String {
    format!("{density}_{tau}_{alpha}")
}

/// `table2.csv`: the wide summary table, regime columns within density
/// blocks, one row per (prior, metric). Density-ratio rows are skipped for
/// the sparsified prior, which shares the horseshoe's state posterior.
pub fn write_table2(path: &Path, result: &SimResult) -> Result<()> {
    use bsts_core::gibbs::PriorKind;
    use bsts_core::sim::Density;

    // density blocks (sparse first) with the variance regimes in encounter
    // order inside each block
    let mut variance_pairs: Vec<(f64, f64)> = Vec::new();
    let mut densities: Vec<Density> = Vec::new();
    let mut priors: Vec<PriorKind> = Vec::new();
    for cell in &result.cells {
        let pair = (cell.sigma_tau_true, cell.sigma_alpha_true);
        if !variance_pairs.contains(&pair) {
            variance_pairs.push(pair);
        }
        if !densities.contains(&cell.density) {
            densities.push(cell.density);
        }
        if !priors.contains(&cell.prior) {
            priors.push(cell.prior);
        }
    }
    densities.sort_by_key(|d| *d != Density::Sparse);
    let regimes: Vec<(Density, f64, f64)> = densities
        .iter()
        .flat_map(|d| variance_pairs.iter().map(|(t, a)| (*d, *t, *a)))
        .collect();

    let mut w = writer(path)?;
    let mut header = vec!["prior".to_string(), "metric".to_string()];
    header.extend(
        regimes
            .iter()
            .map(|(d, t, a)| regime_label(*d, *t, *a)),
    );
    w.write_record(&header)?;

    let lookup = |prior: PriorKind, regime: &(bsts_core::sim::Density, f64, f64)| {
        result.cells.iter().find(|c| {
            c.prior == prior
                && c.density == regime.0
                && c.sigma_tau_true == regime.1
                && c.sigma_alpha_true == regime.2
        })
    };

    for prior in &priors {
        let mut row = vec![prior.to_string(), "bias".to_string()];
        for regime in &regimes {
            row.push(match lookup(*prior, regime) {
                Some(c) => format!("{}", c.bias),
                None => String::new(),
            });
        }
        w.write_record(&row)?;
    }
    type CellMetric = fn(&bsts_core::sim::SimCell) -> f64;
    let metrics: [(&str, CellMetric); 2] =
        [("ds_tau", |c| c.ds_tau), ("ds_alpha", |c| c.ds_alpha)];
    for (metric, pick) in metrics {
        for prior in &priors {
            if *prior == PriorKind::HorseshoeSavs {
                continue;
            }
            let mut row = vec![prior.to_string(), metric.to_string()];
            for regime in &regimes {
                row.push(match lookup(*prior, regime) {
                    Some(c) => format!("{}", pick(c)),
                    None => String::new(),
                });
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `table2_reps.csv`: the per-replication records behind the summary table.
pub fn write_table2_reps(path: &Path, result: &SimResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "prior",
        "density",
        "sigma_tau_true",
        "sigma_alpha_true",
        "rep",
        "sq_error",
        "ds_tau",
        "ds_alpha",
        "error",
    ])?;
    for cell in &result.cells {
        for rep in &cell.reps {
            w.write_record([
                cell.prior.to_string(),
                cell.density.to_string(),
                format!("{}", cell.sigma_tau_true),
                format!("{}", cell.sigma_alpha_true),
                rep.rep.to_string(),
                format!("{}", rep.sq_error),
                format!("{}", rep.ds_tau),
                format!("{}", rep.ds_alpha),
                rep.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
