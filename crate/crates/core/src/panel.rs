//! The call-level observation table consumed by every statistical procedure.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::Timing;

/// Calendar month used to group cross-sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        Self { year, month }
    }

    pub fn of(date: NaiveDate) -> Self {
        Self::new(date.year(), date.month())
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn succ(self) -> Self {
        if self.month == 12 {
            Self::new(self.year + 1, 1)
        } else {
            Self::new(self.year, self.month + 1)
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (y, m) = s.split_once('-').ok_or_else(|| format!("bad month {s:?}"))?;
        let year = y.parse().map_err(|_| format!("bad month {s:?}"))?;
        let month: u32 = m.parse().map_err(|_| format!("bad month {s:?}"))?;
        if !(1..=12).contains(&month) {
            return Err(format!("bad month {s:?}"));
        }
        Ok(Self { year, month })
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One earnings call with its signals and forward returns.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub call_id: String,
    pub ticker: String,
    pub event_date: NaiveDate,
    pub timing: Timing,
    pub signals: BTreeMap<String, Option<f64>>,
    /// Forward return keyed by horizon in trading days.
    pub returns: BTreeMap<u32, Option<f64>>,
}

impl PanelRow {
    pub fn new(call_id: impl Into<String>, ticker: impl Into<String>, event_date: NaiveDate, timing: Timing) -> Self {
        Self {
            call_id: call_id.into(),
            ticker: ticker.into(),
            event_date,
            timing,
            signals: BTreeMap::new(),
            returns: BTreeMap::new(),
        }
    }

    pub fn event_month(&self) -> YearMonth {
        YearMonth::of(self.event_date)
    }

    /// Signal value; missing, absent and non-finite all read as `None`.
    pub fn signal(&self, name: &str) -> Option<f64> {
        self.signals.get(name).copied().flatten().filter(|v| v.is_finite())
    }

    pub fn ret(&self, horizon: u32) -> Option<f64> {
        self.returns.get(&horizon).copied().flatten().filter(|v| v.is_finite())
    }

    pub fn with_signal(mut self, name: &str, value: Option<f64>) -> Self {
        self.signals.insert(name.to_string(), value);
        self
    }

    pub fn with_return(mut self, horizon: u32, value: Option<f64>) -> Self {
        self.returns.insert(horizon, value);
        self
    }
}

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("duplicate panel key (ticker {ticker}, call {call_id})")]
    Duplicate { ticker: String, call_id: String },
    #[error("panel csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("panel csv row {row}: {message}")]
    Field { row: usize, message: String },
    #[error("panel i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Ordered collection of [`PanelRow`]s with unique `(ticker, call_id)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Panel {
    rows: Vec<PanelRow>,
}

impl Panel {
    pub fn new(rows: Vec<PanelRow>) -> Result<Self, PanelError> {
        let mut seen = HashSet::with_capacity(rows.len());
        for r in &rows {
            if !seen.insert((r.ticker.as_str(), r.call_id.as_str())) {
                return Err(PanelError::Duplicate {
                    ticker: r.ticker.clone(),
                    call_id: r.call_id.clone(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[PanelRow] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [PanelRow] {
        &mut self.rows
    }

    pub fn into_rows(self) -> Vec<PanelRow> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows dated strictly before `cutoff`.
    pub fn before(&self, cutoff: NaiveDate) -> Panel {
        self.filter(|r| r.event_date < cutoff)
    }

    /// Rows dated on or after `cutoff`.
    pub fn from_date(&self, cutoff: NaiveDate) -> Panel {
        self.filter(|r| r.event_date >= cutoff)
    }

    pub fn filter(&self, keep: impl Fn(&PanelRow) -> bool) -> Panel {
        Panel {
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    /// Rows grouped by event month, months ascending, rows in panel order.
    pub fn by_month(&self) -> BTreeMap<YearMonth, Vec<&PanelRow>> {
        let mut out: BTreeMap<YearMonth, Vec<&PanelRow>> = BTreeMap::new();
        for r in &self.rows {
            out.entry(r.event_month()).or_default().push(r);
        }
        out
    }

    pub fn signal_names(&self) -> BTreeSet<String> {
        self.rows.iter().flat_map(|r| r.signals.keys().cloned()).collect()
    }

    pub fn horizons(&self) -> BTreeSet<u32> {
        self.rows.iter().flat_map(|r| r.returns.keys().copied()).collect()
    }

    /// Write as CSV: identity columns, signals (sorted by name), then
    /// `ret_<h>` columns. Missing values are empty cells.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), PanelError> {
        let signals: Vec<String> = self.signal_names().into_iter().collect();
        let horizons: Vec<u32> = self.horizons().into_iter().collect();
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["call_id".to_string(), "ticker".into(), "event_date".into(), "timing".into()];
        header.extend(signals.iter().cloned());
        header.extend(horizons.iter().map(|h| format!("ret_{h}")));
        wtr.write_record(&header)?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                r.call_id.clone(),
                r.ticker.clone(),
                r.event_date.to_string(),
                r.timing.as_str().to_string(),
            ];
            rec.extend(signals.iter().map(|s| cell(r.signals.get(s).copied().flatten())));
            rec.extend(horizons.iter().map(|h| cell(r.returns.get(h).copied().flatten())));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, PanelError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        let fixed = ["call_id", "ticker", "event_date", "timing"];
        for (i, name) in fixed.iter().enumerate() {
            if header.get(i) != Some(*name) {
                return Err(PanelError::Field {
                    row: 0,
                    message: format!("expected column {i} to be {name:?}"),
                });
            }
        }
        enum Col {
            Signal(String),
            Ret(u32),
        }
        let cols: Vec<Col> = header
            .iter()
            .skip(fixed.len())
            .map(|h| match h.strip_prefix("ret_").and_then(|x| x.parse().ok()) {
                Some(hz) => Col::Ret(hz),
                None => Col::Signal(h.to_string()),
            })
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row_no = i + 1;
            let err = |message: String| PanelError::Field { row: row_no, message };
            let event_date = NaiveDate::from_str(&rec[2]).map_err(|e| err(format!("event_date: {e}")))?;
            let timing = rec[3].parse::<Timing>().map_err(err)?;
            let mut row = PanelRow::new(&rec[0], &rec[1], event_date, timing);
            for (col, raw) in cols.iter().zip(rec.iter().skip(fixed.len())) {
                let value = if raw.is_empty() {
                    None
                } else {
                    Some(raw.parse::<f64>().map_err(|e| err(format!("{raw:?}: {e}")))?)
                };
                match col {
                    Col::Signal(name) => {
                        row.signals.insert(name.clone(), value);
                    }
                    Col::Ret(h) => {
                        row.returns.insert(*h, value);
                    }
                }
            }
            rows.push(row);
        }
        Panel::new(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn duplicate_key_rejected() {
        let a = PanelRow::new("c1", "AAA", d(2020, 1, 5), Timing::Amc);
        let b = PanelRow::new("c1", "AAA", d(2020, 2, 5), Timing::Bmo);
        assert!(matches!(Panel::new(vec![a.clone(), b]), Err(PanelError::Duplicate { .. })));
        let c = PanelRow::new("c1", "BBB", d(2020, 2, 5), Timing::Bmo);
        assert!(Panel::new(vec![a, c]).is_ok());
    }

    #[test]
    fn csv_round_trip_preserves_missing_and_bits() {
        let rows = vec![
            PanelRow::new("c1", "AAA", d(2020, 1, 5), Timing::Amc)
                .with_signal("m1", Some(0.1 + 0.2))
                .with_signal("m5", None)
                .with_return(1, Some(-0.012345678901234567))
                .with_return(5, None),
            PanelRow::new("c2", "BBB", d(2020, 1, 9), Timing::Bmo)
                .with_signal("m1", Some(1e-300))
                .with_signal("m5", Some(-0.5))
                .with_return(1, Some(0.0))
                .with_return(5, Some(3.0)),
        ];
        let panel = Panel::new(rows).unwrap();
        let mut buf = Vec::new();
        panel.write_csv(&mut buf).unwrap();
        let back = Panel::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, panel);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("call_id,ticker,event_date,timing,m1,m5,ret_1,ret_5\n"));
    }

    #[test]
    fn month_helpers() {
        let ym = YearMonth::of(d(2022, 12, 31));
        assert_eq!(ym.to_string(), "2022-12");
        assert_eq!(ym.succ(), YearMonth::new(2023, 1));
        assert_eq!("2023-01".parse::<YearMonth>().unwrap(), YearMonth::new(2023, 1));
        assert!("2023-13".parse::<YearMonth>().is_err());
    }

    #[test]
    fn split_by_cutoff() {
        let rows = vec![
            PanelRow::new("a", "T", d(2022, 12, 31), Timing::Amc),
            PanelRow::new("b", "T", d(2023, 1, 1), Timing::Amc),
        ];
        let p = Panel::new(rows).unwrap();
        assert_eq!(p.before(d(2023, 1, 1)).len(), 1);
        assert_eq!(p.from_date(d(2023, 1, 1)).rows()[0].call_id, "b");
    }
}
