//! Pseudo-real-time release calendar.
//!
//! A calendar is an ordered list of vintages. Each vintage sits in a month of
//! the quarter cycle (months 4 and 5 fall after the quarter ends but before
//! the target is published) and releases one group of series at one
//! publication lag. A cell `(series, month_offset)` of the nowcast quarter is
//! observable at vintage `v` if any vintage up to `v` released that month of
//! that series, so the information set grows monotonically through the cycle.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PubLag, TransformCode};
use crate::error::{Error, Result};

/// One calendar row: what gets released, when, and how it is transformed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseSpec {
    pub vintage: usize,
    /// Month within the quarter cycle, `1..=5`.
    pub month: u32,
    /// Free-text timing label ("1st Friday of month 2", ...).
    pub timing: String,
    /// Series names; a trailing `*` matches any series with that prefix.
    pub series: Vec<String>,
    pub lag: Option<PubLag>,
    pub transform: Option<TransformCode>,
}

impl ReleaseSpec {
    /// Reference month of the released data within the quarter cycle
    /// (1..=3 touches the nowcast quarter; anything else does not).
    fn data_month(&self) -> Option<i64> {
        self.lag
            .as_ref()
            .map(|lag| self.month as i64 - lag.months() as i64)
    }

    fn matches(&self, name: &str) -> bool {
        self.series.iter().any(|p| pattern_matches(p, name))
    }
}

fn pattern_matches(pattern: &str, name: &str) -> bool {
    match pattern.strip_suffix('*') {
        Some(prefix) => name.starts_with(prefix),
        None => pattern == name,
    }
}

/// Ordered release schedule for one quarter cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VintageCalendar {
    entries: Vec<ReleaseSpec>,
}

impl VintageCalendar {
    pub fn from_entries(entries: Vec<ReleaseSpec>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("calendar has no vintages".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.vintage != i {
                return Err(Error::Config(format!(
                    "calendar vintages must be consecutive from 0; entry {i} has id {}",
                    e.vintage
                )));
            }
            if !(1..=5).contains(&e.month) {
                return Err(Error::Config(format!(
                    "vintage {i}: month {} outside the quarter cycle (1..=5)",
                    e.month
                )));
            }
            if !e.series.is_empty() && e.lag.is_none() {
                return Err(Error::Config(format!(
                    "vintage {i} releases series but has no publication lag"
                )));
            }
        }
        for w in entries.windows(2) {
            if w[1].month < w[0].month {
                return Err(Error::Config(format!(
                    "calendar months must be non-decreasing (vintage {})",
                    w[1].vintage
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ReleaseSpec] {
        &self.entries
    }

    /// Is the nowcast-quarter cell `(series, month_offset)` released by
    /// vintage `vintage_id`? Offset 0 is the latest month of the quarter.
    pub fn is_observable(&self, vintage_id: usize, series: &str, month_offset: usize) -> bool {
        let target_month = 3 - month_offset as i64;
        self.entries[..=vintage_id.min(self.entries.len() - 1)]
            .iter()
            .any(|e| e.data_month() == Some(target_month) && e.matches(series))
    }

    /// Cells of the nowcast row still unobserved at a vintage, as indices
    /// into the panel's column metadata.
    pub fn masked_columns(
        &self,
        vintage_id: usize,
        column_meta: &[super::ColumnMeta],
    ) -> Vec<usize> {
        column_meta
            .iter()
            .enumerate()
            .filter(|(_, m)| !self.is_observable(vintage_id, &m.series, m.month_offset))
            .map(|(j, _)| j)
            .collect()
    }

    /// Transformation code attached to the first calendar entry naming the
    /// series.
    pub fn transform_for(&self, series: &str) -> Option<TransformCode> {
        self.entries
            .iter()
            .find(|e| e.matches(series))
            .and_then(|e| e.transform)
    }

    /// Publication lag attached to the first calendar entry naming the series.
    pub fn pub_lag_for(&self, series: &str) -> Option<PubLag> {
        self.entries
            .iter()
            .find(|e| e.matches(series))
            .and_then(|e| e.lag)
    }

    /// Every series pattern in the calendar must match at least one of the
    /// panel's series.
    pub fn validate_series(&self, names: &[&str]) -> Result<()> {
        for e in &self.entries {
            for pattern in &e.series {
                if !names.iter().any(|n| pattern_matches(pattern, n)) {
                    return Err(Error::Config(format!(
                        "calendar vintage {} names series '{}' which matches no data series",
                        e.vintage, pattern
                    )));
                }
            }
        }
        Ok(())
    }

    /// Load from the TOML schema (see `from_toml_str`).
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Parse the calendar TOML: an array of `[[vintage]]` tables with fields
    /// `id`, `month`, `timing`, and (for releasing vintages) `series`, `lag`
    /// (`"m" | "m-1" | "m-2"`) and `transform` (`1..=4`).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: CalendarFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("calendar: {e}")))?;
        let entries = file
            .vintage
            .into_iter()
            .map(|row| {
                Ok(ReleaseSpec {
                    vintage: row.id,
                    month: row.month,
                    timing: row.timing,
                    series: row.series,
                    lag: row.lag.as_deref().map(PubLag::parse).transpose()?,
                    transform: row.transform.map(TransformCode::from_code).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(entries)
    }

    /// The release schedule of the bundled US quarterly-growth setup: 31
    /// vintages per quarter cycle covering the macro series and the
    /// search-volume block (`gt*`), built from the actual publication order.
    pub fn us_gdp_schedule() -> Self {
        let rows: &[(u32, &str, &[&str], &str, u8)] = &[
            (1, "Last day of month 1", &["fedfunds", "baa"], "m", 3),
            (1, "Last day of month 1", &["gt*"], "m", 4),
            (2, "1st business day of month 2", &["uncertainty"], "m-1", 1),
            (2, "1st Friday of month 2", &["hours", "unrate"], "m-1", 2),
            (2, "Middle of month 2", &["cpi"], "m-1", 2),
            (2, "15th-17th of month 2", &["indpro"], "m-1", 2),
            (2, "3rd week of month 2", &["loans", "m2"], "m-1", 2),
            (2, "Later part of month 2", &["housst"], "m-1", 1),
            (2, "Last week of month 2", &["pce", "pce2"], "m-1", 2),
            (2, "Last day of month 2", &["fedfunds", "baa"], "m", 3),
            (2, "Last day of month 2", &["gt*"], "m", 4),
            (3, "1st business day of month 3", &["uncertainty"], "m-1", 1),
            (3, "1st business day of month 3", &["construction"], "m-2", 1),
            (3, "1st Friday of month 3", &["hours", "unrate"], "m-1", 2),
            (3, "Middle of month 3", &["cpi"], "m-1", 2),
            (3, "15th-17th of month 3", &["indpro"], "m-1", 2),
            (3, "3rd week of month 3", &["loans", "m2"], "m-1", 2),
            (3, "Later part of month 3", &["housst"], "m-1", 1),
            (3, "Last week of month 3", &["pce", "pce2"], "m-1", 2),
            (3, "Last day of month 3", &["fedfunds", "baa"], "m", 3),
            (3, "Last day of month 3", &["gt*"], "m", 4),
            (4, "1st business day of month 4", &["uncertainty"], "m-1", 1),
            (4, "1st business day of month 4", &["construction"], "m-2", 1),
            (4, "1st Friday of month 4", &["hours", "unrate"], "m-1", 2),
            (4, "Middle of month 4", &["cpi"], "m-1", 2),
            (4, "15th-17th of month 4", &["indpro"], "m-1", 2),
            (4, "3rd week of month 4", &["loans", "m2"], "m-1", 2),
            (4, "Later part of month 4", &["housst"], "m-1", 1),
            (4, "Last week of month 4", &["pce", "pce2"], "m-1", 2),
            (5, "Later part of month 5", &["housst"], "m-2", 1),
        ];
        let mut entries = vec![ReleaseSpec {
            vintage: 0,
            month: 1,
            timing: "First day of month 1".to_string(),
            series: Vec::new(),
            lag: None,
            transform: None,
        }];
        for (i, (month, timing, series, lag, transform)) in rows.iter().enumerate() {
            entries.push(ReleaseSpec {
                vintage: i + 1,
                month: *month,
                timing: timing.to_string(),
                series: series.iter().map(|s| s.to_string()).collect(),
                lag: Some(PubLag::parse(lag).expect("static lag")),
                transform: Some(TransformCode::from_code(*transform).expect("static code")),
            });
        }
        Self::from_entries(entries).expect("static schedule is well-formed")
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct CalendarFile {
    vintage: Vec<VintageRow>,
}

#[derive(Debug, Deserialize, Serialize)]
struct VintageRow {
    id: usize,
    month: u32,
    timing: String,
    #[serde(default)]
    series: Vec<String>,
    #[serde(default)]
    lag: Option<String>,
    #[serde(default)]
    transform: Option<u8>,
}
