//! CSV input and output.
//!
//! Monthly data arrive in long format (`date,series,value` with `date` as
//! `YYYY-MM`); the quarterly target as `date,value` with `date` as `YYYYQn`.
//! Series metadata (transformation code, publication lag) comes from the
//! release calendar.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DVector;

use super::calendar::VintageCalendar;
use super::{MonthlySeries, Quarter, QuarterlyPanel, YearMonth};
use crate::error::{Error, Result};

/// Load the monthly long-format CSV, attaching each series' transformation
/// and publication lag from the calendar. Rows may arrive in any order;
/// months must end up consecutive per series.
pub fn load_monthly_csv(path: &Path, calendar: &VintageCalendar) -> Result<Vec<MonthlySeries>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut grouped: BTreeMap<String, Vec<(YearMonth, f64)>> = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 2; // header is line 1
        if record.len() != 3 {
            return Err(Error::Data(format!(
                "{}:{line}: expected 3 fields (date,series,value), got {}",
                path.display(),
                record.len()
            )));
        }
        let ym = YearMonth::parse(&record[0])
            .map_err(|e| Error::Data(format!("{}:{line}: {e}", path.display())))?;
        let series = record[1].to_string();
        let value: f64 = record[2].parse().map_err(|_| {
            Error::Data(format!(
                "{}:{line}: bad value '{}'",
                path.display(),
                &record[2]
            ))
        })?;
        grouped.entry(series).or_default().push((ym, value));
    }
    if grouped.is_empty() {
        return Err(Error::Data(format!(
            "{}: no monthly observations",
            path.display()
        )));
    }

    let mut out = Vec::with_capacity(grouped.len());
    for (name, mut rows) in grouped {
        rows.sort_by_key(|(ym, _)| *ym);
        let start = rows[0].0;
        for (i, (ym, _)) in rows.iter().enumerate() {
            let expected = start.plus_months(i as i64);
            if *ym != expected {
                return Err(Error::Data(format!(
                    "series '{name}': gap or duplicate at {ym} (expected {expected})"
                )));
            }
        }
        let transform = calendar.transform_for(&name).ok_or_else(|| {
            Error::Config(format!("series '{name}' does not appear in the calendar"))
        })?;
        let pub_lag = calendar
            .pub_lag_for(&name)
            .expect("series matched an entry, lag present");
        out.push(MonthlySeries {
            name,
            start,
            values: rows.into_iter().map(|(_, v)| v).collect(),
            transform,
            pub_lag,
        });
    }
    Ok(out)
}

/// Load the quarterly target CSV. Quarters must be consecutive.
pub fn load_quarterly_csv(path: &Path) -> Result<(Quarter, DVector<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<(Quarter, f64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        if record.len() != 2 {
            return Err(Error::Data(format!(
                "{}:{line}: expected 2 fields (date,value), got {}",
                path.display(),
                record.len()
            )));
        }
        let q = Quarter::parse(&record[0])
            .map_err(|e| Error::Data(format!("{}:{line}: {e}", path.display())))?;
        let value: f64 = record[1].parse().map_err(|_| {
            Error::Data(format!(
                "{}:{line}: bad value '{}'",
                path.display(),
                &record[1]
            ))
        })?;
        rows.push((q, value));
    }
    if rows.is_empty() {
        return Err(Error::Data(format!(
            "{}: no quarterly observations",
            path.display()
        )));
    }
    rows.sort_by_key(|(q, _)| *q);
    let start = rows[0].0;
    for (i, (q, _)) in rows.iter().enumerate() {
        let expected = start.plus_quarters(i as i64);
        if *q != expected {
            return Err(Error::Data(format!(
                "quarterly target: gap or duplicate at {q} (expected {expected})"
            )));
        }
    }
    Ok((
        start,
        DVector::from_iterator(rows.len(), rows.into_iter().map(|(_, v)| v)),
    ))
}

/// Write the panel (and its nowcast row, when present) as a wide CSV for
/// inspection.
pub fn write_panel_csv<W: Write>(panel: &QuarterlyPanel, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["quarter".to_string(), "y".to_string()];
    header.extend(panel.column_meta.iter().map(|m| m.label()));
    w.write_record(&header)?;
    for t in 0..panel.t_len() {
        let mut row = vec![
            panel.first_quarter.plus_quarters(t as i64).to_string(),
            format!("{}", panel.y[t]),
        ];
        row.extend((0..panel.n_columns()).map(|j| format!("{}", panel.x[(t, j)])));
        w.write_record(&row)?;
    }
    if let Some(next) = &panel.next_x {
        let mut row = vec![panel.next_quarter().to_string(), String::new()];
        row.extend((0..panel.n_columns()).map(|j| format!("{}", next[j])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
