//! Subcommand implementations.

pub mod estimate;
pub mod evaluate;
pub mod nowcast;
pub mod simulate;

use anyhow::Result;

use bsts_core::data::calendar::VintageCalendar;
use bsts_core::data::{
    apply_transform,
    io::{load_monthly_csv, load_quarterly_csv},
    build_panel, QuarterlyPanel,
};
use bsts_core::Error;

use crate::config::FileConfig;

pub struct LoadedData {
    pub panel: QuarterlyPanel,
    pub calendar: VintageCalendar,
}

/// Load calendar, quarterly target and monthly regressors, apply the
/// configured transformations and assemble the raw panel.
pub fn load_data(cfg: &FileConfig) -> Result<LoadedData> {
    let calendar = match &cfg.data.calendar {
        Some(path) => VintageCalendar::from_path(path)?,
        None => VintageCalendar::us_gdp_schedule(),
    };
    let quarterly = cfg
        .data
        .quarterly
        .as_ref()
        .ok_or_else(|| Error::Config("no quarterly data path configured".into()))?;
    let (start, y) = load_quarterly_csv(quarterly)?;
    let series = match &cfg.data.monthly {
        None => Vec::new(),
        Some(path) => load_monthly_csv(path, &calendar)?
            .iter()
            .map(apply_transform)
            .collect::<bsts_core::Result<Vec<_>>>()?,
    };
    let panel = build_panel(&y, start, &series)?;
    Ok(LoadedData { panel, calendar })
}
