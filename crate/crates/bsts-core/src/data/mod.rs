//! Mixed-frequency data handling: monthly transformations, skip-sampling into
//! a quarterly design, standardisation, and ragged-edge masking driven by a
//! release calendar.
//!
//! The design matrix follows the vertical-realignment convention: each monthly
//! series contributes three columns per quarter, ordered latest month first,
//! so row `t` reads `(x_month3, x_month2, x_month1)` for every series.

pub mod calendar;
pub mod io;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use calendar::VintageCalendar;

/// Calendar month, `month` in `1..=12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Data(format!("month {month} out of range")));
        }
        Ok(Self { year, month })
    }

    fn index(&self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_index(i: i64) -> Self {
        Self {
            year: i.div_euclid(12) as i32,
            month: (i.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn plus_months(&self, n: i64) -> Self {
        Self::from_index(self.index() + n)
    }

    /// Months between `self` and `other` (`other - self`).
    pub fn months_until(&self, other: &YearMonth) -> i64 {
        other.index() - self.index()
    }

    /// Parse `"YYYY-MM"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::Data(format!("bad month '{s}' (expected YYYY-MM)")))?;
        let year: i32 = y
            .parse()
            .map_err(|_| Error::Data(format!("bad year in '{s}'")))?;
        let month: u32 = m
            .parse()
            .map_err(|_| Error::Data(format!("bad month in '{s}'")))?;
        Self::new(year, month)
    }
}

impl std::fmt::Display for YearMonth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Calendar quarter, `quarter` in `1..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quarter {
    pub year: i32,
    pub quarter: u32,
}

impl Quarter {
    pub fn new(year: i32, quarter: u32) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(Error::Data(format!("quarter {quarter} out of range")));
        }
        Ok(Self { year, quarter })
    }

    fn index(&self) -> i64 {
        self.year as i64 * 4 + (self.quarter as i64 - 1)
    }

    fn from_index(i: i64) -> Self {
        Self {
            year: i.div_euclid(4) as i32,
            quarter: (i.rem_euclid(4) + 1) as u32,
        }
    }

    pub fn plus_quarters(&self, n: i64) -> Self {
        Self::from_index(self.index() + n)
    }

    /// The three months of the quarter, ascending.
    pub fn months(&self) -> [YearMonth; 3] {
        let first = YearMonth {
            year: self.year,
            month: (self.quarter - 1) * 3 + 1,
        };
        [first, first.plus_months(1), first.plus_months(2)]
    }

    /// Parse `"YYYYQn"` (case-insensitive `Q`).
    pub fn parse(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        let (y, q) = upper
            .split_once('Q')
            .ok_or_else(|| Error::Data(format!("bad quarter '{s}' (expected YYYYQn)")))?;
        let year: i32 = y
            .trim_end_matches('-')
            .parse()
            .map_err(|_| Error::Data(format!("bad year in '{s}'")))?;
        let quarter: u32 = q
            .parse()
            .map_err(|_| Error::Data(format!("bad quarter in '{s}'")))?;
        Self::new(year, quarter)
    }
}

impl std::fmt::Display for Quarter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}Q{}", self.year, self.quarter)
    }
}

/// How a raw monthly series is turned into the model input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformCode {
    /// Code 1: first difference.
    MonthlyChange,
    /// Code 2: percentage growth rate.
    MonthlyGrowthRate,
    /// Code 3: no change.
    None,
    /// Code 4: already deseasonalised upstream, passed through.
    Deseasonalised,
}

impl TransformCode {
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(TransformCode::MonthlyChange),
            2 => Ok(TransformCode::MonthlyGrowthRate),
            3 => Ok(TransformCode::None),
            4 => Ok(TransformCode::Deseasonalised),
            other => Err(Error::Config(format!("unknown transformation code {other}"))),
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            TransformCode::MonthlyChange => 1,
            TransformCode::MonthlyGrowthRate => 2,
            TransformCode::None => 3,
            TransformCode::Deseasonalised => 4,
        }
    }
}

/// Publication lag of a release relative to its reference month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PubLag {
    /// Released within the reference month.
    M,
    /// One month behind.
    M1,
    /// Two months behind.
    M2,
}

impl PubLag {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(PubLag::M),
            "m-1" => Ok(PubLag::M1),
            "m-2" => Ok(PubLag::M2),
            other => Err(Error::Config(format!(
                "unknown publication lag '{other}' (expected m | m-1 | m-2)"
            ))),
        }
    }

    pub fn months(&self) -> u32 {
        match self {
            PubLag::M => 0,
            PubLag::M1 => 1,
            PubLag::M2 => 2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PubLag::M => "m",
            PubLag::M1 => "m-1",
            PubLag::M2 => "m-2",
        }
    }
}

/// One monthly input series with its alignment and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySeries {
    pub name: String,
    /// Month of the first value; values are consecutive months, no gaps.
    pub start: YearMonth,
    pub values: Vec<f64>,
    pub transform: TransformCode,
    pub pub_lag: PubLag,
}

impl MonthlySeries {
    pub fn end(&self) -> YearMonth {
        self.start.plus_months(self.values.len() as i64 - 1)
    }

    pub fn value_at(&self, ym: &YearMonth) -> Option<f64> {
        let offset = self.start.months_until(ym);
        if offset < 0 || offset as usize >= self.values.len() {
            None
        } else {
            Some(self.values[offset as usize])
        }
    }
}

/// Apply the series' transformation code. Differencing codes shorten the
/// series by one month and shift its start accordingly.
pub fn apply_transform(s: &MonthlySeries) -> Result<MonthlySeries> {
    match s.transform {
        TransformCode::None | TransformCode::Deseasonalised => Ok(s.clone()),
        TransformCode::MonthlyChange => {
            if s.values.len() < 2 {
                return Err(Error::Data(format!(
                    "series '{}' too short to difference",
                    s.name
                )));
            }
            Ok(MonthlySeries {
                values: s.values.windows(2).map(|w| w[1] - w[0]).collect(),
                start: s.start.plus_months(1),
                ..s.clone()
            })
        }
        TransformCode::MonthlyGrowthRate => {
            if s.values.len() < 2 {
                return Err(Error::Data(format!(
                    "series '{}' too short for growth rates",
                    s.name
                )));
            }
            let mut out = Vec::with_capacity(s.values.len() - 1);
            for (i, w) in s.values.windows(2).enumerate() {
                if w[0] == 0.0 {
                    return Err(Error::Data(format!(
                        "series '{}': growth rate undefined at index {} (zero base value)",
                        s.name,
                        i + 1
                    )));
                }
                out.push(100.0 * (w[1] / w[0] - 1.0));
            }
            Ok(MonthlySeries {
                values: out,
                start: s.start.plus_months(1),
                ..s.clone()
            })
        }
    }
}

/// Where a design column came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub series: String,
    /// 0 = latest month of the quarter, 1 = middle, 2 = earliest.
    pub month_offset: usize,
}

impl ColumnMeta {
    pub fn label(&self) -> String {
        format!("{}_{}", self.series, self.month_offset)
    }
}

/// Standardisation constants of the design columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl ColumnScaling {
    /// Scale a raw predictive row in place.
    pub fn scale_row(&self, row: &mut DVector<f64>) {
        for j in 0..row.len() {
            row[j] = (row[j] - self.means[j]) / self.sds[j];
        }
    }

    /// Map coefficients estimated on standardised columns back to the raw
    /// column scale.
    pub fn destandardise_beta(&self, beta: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(beta.len(), |j, _| beta[j] / self.sds[j])
    }
}

/// Quarterly target plus the skip-sampled monthly design.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterlyPanel {
    pub y: DVector<f64>,
    /// `T x 3K` design, columns grouped per series with offsets `[0, 1, 2]`.
    pub x: DMatrix<f64>,
    pub column_meta: Vec<ColumnMeta>,
    pub first_quarter: Quarter,
    /// Regressor row of the quarter following the sample, when the monthly
    /// data cover it. This is the nowcast row that masking operates on.
    pub next_x: Option<DVector<f64>>,
    pub scaling: Option<ColumnScaling>,
}

impl QuarterlyPanel {
    pub fn t_len(&self) -> usize {
        self.y.len()
    }

    pub fn n_columns(&self) -> usize {
        self.x.ncols()
    }

    /// Quarter the nowcast row refers to.
    pub fn next_quarter(&self) -> Quarter {
        self.first_quarter.plus_quarters(self.t_len() as i64)
    }

    pub fn series_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self
            .column_meta
            .iter()
            .map(|c| c.series.as_str())
            .collect();
        names.dedup();
        names
    }

    /// Sub-panel for a rolling origin: training rows `0..origin` with the row
    /// at `origin` attached as the nowcast row. `origin == t_len()` uses the
    /// beyond-sample row. Must be called on a raw (unstandardised) panel.
    pub fn origin_panel(&self, origin: usize) -> Result<QuarterlyPanel> {
        if self.scaling.is_some() {
            return Err(Error::Config(
                "rolling origins must be cut from the raw panel".into(),
            ));
        }
        if origin < 3 {
            return Err(Error::InvalidDimension(format!(
                "origin {origin} leaves too little training data"
            )));
        }
        let next_x = if origin < self.t_len() {
            Some(self.x.row(origin).transpose())
        } else if origin == self.t_len() {
            match &self.next_x {
                Some(row) => Some(row.clone()),
                None => {
                    return Err(Error::Data(
                        "monthly data do not cover the quarter after the sample".into(),
                    ))
                }
            }
        } else {
            return Err(Error::InvalidDimension(format!(
                "origin {origin} beyond panel length {}",
                self.t_len()
            )));
        };
        Ok(QuarterlyPanel {
            y: DVector::from_fn(origin, |i, _| self.y[i]),
            x: self.x.rows(0, origin).into_owned(),
            column_meta: self.column_meta.clone(),
            first_quarter: self.first_quarter,
            next_x,
            scaling: None,
        })
    }
}

/// Skip-sample transformed monthly series into the `T x 3K` design block.
///
/// Row `t` holds, per series, the quarter's months in reverse chronological
/// order. Every series must cover all months of all requested quarters.
pub fn skip_sample(
    series: &[MonthlySeries],
    first_quarter: Quarter,
    t_quarters: usize,
) -> Result<(DMatrix<f64>, Vec<ColumnMeta>)> {
    if t_quarters == 0 {
        return Err(Error::InvalidDimension("need at least one quarter".into()));
    }
    let k = series.len();
    let mut x = DMatrix::zeros(t_quarters, 3 * k);
    let mut meta = Vec::with_capacity(3 * k);
    for (s_idx, s) in series.iter().enumerate() {
        for offset in 0..3 {
            meta.push(ColumnMeta {
                series: s.name.clone(),
                month_offset: offset,
            });
        }
        for t in 0..t_quarters {
            let months = first_quarter.plus_quarters(t as i64).months();
            for offset in 0..3usize {
                // offset 0 = latest month of the quarter
                let ym = months[2 - offset];
                let value = s.value_at(&ym).ok_or_else(|| {
                    Error::Data(format!(
                        "series '{}' has no value for {} (covers {} to {})",
                        s.name,
                        ym,
                        s.start,
                        s.end()
                    ))
                })?;
                x[(t, 3 * s_idx + offset)] = value;
            }
        }
    }
    Ok((x, meta))
}

/// Assemble the quarterly panel from the target and the (already transformed)
/// monthly series. The nowcast row for the following quarter is attached when
/// the monthly data reach that far.
pub fn build_panel(
    y: &DVector<f64>,
    first_quarter: Quarter,
    series: &[MonthlySeries],
) -> Result<QuarterlyPanel> {
    let t_len = y.len();
    if t_len == 0 {
        return Err(Error::InvalidDimension("empty target series".into()));
    }
    let (x, column_meta) = skip_sample(series, first_quarter, t_len)?;
    let next_quarter = first_quarter.plus_quarters(t_len as i64);
    let next_x = match skip_sample(series, next_quarter, 1) {
        Ok((row, _)) => Some(row.row(0).transpose()),
        Err(_) => None,
    };
    Ok(QuarterlyPanel {
        y: y.clone(),
        x,
        column_meta,
        first_quarter,
        next_x,
        scaling: None,
    })
}

/// Standardise the columns of a bare design matrix to zero mean and unit
/// sample standard deviation, returning the constants.
pub fn standardise_columns(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, ColumnScaling)> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidDimension(
            "standardisation needs at least 2 rows".into(),
        ));
    }
    let mut out = x.clone();
    let mut means = Vec::with_capacity(x.ncols());
    let mut sds = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let col = x.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let sd = var.sqrt();
        if !(sd.is_finite() && sd > 0.0) {
            return Err(Error::Data(format!("column {j} has zero variance")));
        }
        for i in 0..n {
            out[(i, j)] = (x[(i, j)] - mean) / sd;
        }
        means.push(mean);
        sds.push(sd);
    }
    Ok((out, ColumnScaling { means, sds }))
}

/// Centre and scale every design column to zero mean and unit sample standard
/// deviation, storing the constants; the nowcast row is scaled with the same
/// constants.
pub fn standardise(panel: &QuarterlyPanel) -> Result<QuarterlyPanel> {
    if panel.scaling.is_some() {
        return Err(Error::Config("panel is already standardised".into()));
    }
    let t_len = panel.t_len();
    if t_len < 2 {
        return Err(Error::InvalidDimension(
            "standardisation needs at least 2 periods".into(),
        ));
    }
    let k = panel.n_columns();
    let mut means = Vec::with_capacity(k);
    let mut sds = Vec::with_capacity(k);
    let mut x = panel.x.clone();
    for j in 0..k {
        let col = panel.x.column(j);
        let mean = col.sum() / t_len as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t_len as f64 - 1.0);
        let sd = var.sqrt();
        if !(sd.is_finite() && sd > 0.0) {
            return Err(Error::Data(format!(
                "column '{}' has zero variance",
                panel.column_meta[j].label()
            )));
        }
        for i in 0..t_len {
            x[(i, j)] = (panel.x[(i, j)] - mean) / sd;
        }
        means.push(mean);
        sds.push(sd);
    }
    let scaling = ColumnScaling { means, sds };
    let next_x = panel.next_x.as_ref().map(|row| {
        let mut row = row.clone();
        scaling.scale_row(&mut row);
        row
    });
    Ok(QuarterlyPanel {
        y: panel.y.clone(),
        x,
        column_meta: panel.column_meta.clone(),
        first_quarter: panel.first_quarter,
        next_x,
        scaling: Some(scaling),
    })
}

/// Undo [`standardise`], restoring the raw column values.
pub fn destandardise(panel: &QuarterlyPanel) -> Result<QuarterlyPanel> {
    let scaling = panel
        .scaling
        .as_ref()
        .ok_or_else(|| Error::Config("panel is not standardised".into()))?;
    let mut x = panel.x.clone();
    for j in 0..panel.n_columns() {
        for i in 0..panel.t_len() {
            x[(i, j)] = panel.x[(i, j)] * scaling.sds[j] + scaling.means[j];
        }
    }
    let next_x = panel.next_x.as_ref().map(|row| {
        DVector::from_fn(row.len(), |j, _| row[j] * scaling.sds[j] + scaling.means[j])
    });
    Ok(QuarterlyPanel {
        y: panel.y.clone(),
        x,
        column_meta: panel.column_meta.clone(),
        first_quarter: panel.first_quarter,
        next_x,
        scaling: None,
    })
}

/// Zero out the nowcast-row cells that are not yet released at the given
/// vintage. Runs on the standardised panel so a zero encodes "at the sample
/// mean". In-sample rows are final data and stay untouched.
pub fn mask_unpublished(
    panel: &QuarterlyPanel,
    calendar: &VintageCalendar,
    vintage_id: usize,
) -> Result<QuarterlyPanel> {
    if panel.scaling.is_none() {
        return Err(Error::Config(
            "mask the standardised panel (zeros must encode the column mean)".into(),
        ));
    }
    if vintage_id >= calendar.len() {
        return Err(Error::Config(format!(
            "vintage {vintage_id} out of range (calendar has {})",
            calendar.len()
        )));
    }
    calendar.validate_series(&panel.series_names())?;
    let mut next_x = panel
        .next_x
        .clone()
        .ok_or_else(|| Error::Data("panel has no nowcast row to mask".into()))?;
    for (j, meta) in panel.column_meta.iter().enumerate() {
        if !calendar.is_observable(vintage_id, &meta.series, meta.month_offset) {
            next_x[j] = 0.0;
        }
    }
    Ok(QuarterlyPanel {
        next_x: Some(next_x),
        ..panel.clone()
    })
}
