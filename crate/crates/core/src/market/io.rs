//! Delimited-file readers for prices, earnings and daily factors.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use serde::Deserialize;

use super::{FactorDay, MarketError, PriceSeries};

/// `YYYY-MM-DD` or `YYYYMMDD`.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%Y%m%d"))
        .ok()
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

fn csv_err(file: &str) -> impl Fn(csv::Error) -> MarketError + '_ {
    move |source| MarketError::Csv {
        file: file.to_string(),
        source,
    }
}

fn date_field(file: &str, row: usize, s: &str) -> Result<NaiveDate, MarketError> {
    parse_date(s).ok_or_else(|| MarketError::Parse {
        file: file.to_string(),
        row,
        message: format!("bad date {s:?}"),
    })
}

#[derive(Deserialize)]
struct PriceRecord {
    ticker: String,
    date: String,
    close: f64,
}

/// Prices `{ticker, date, close}`; rows may come in any order.
pub fn read_prices<R: Read>(r: R) -> Result<BTreeMap<String, PriceSeries>, MarketError> {
    const FILE: &str = "prices";
    let mut by_ticker: BTreeMap<String, Vec<(NaiveDate, f64)>> = BTreeMap::new();
    for (i, rec) in reader(r).deserialize::<PriceRecord>().enumerate() {
        let rec = rec.map_err(csv_err(FILE))?;
        let date = date_field(FILE, i + 2, &rec.date)?;
        by_ticker.entry(rec.ticker).or_default().push((date, rec.close));
    }
    by_ticker
        .into_iter()
        .map(|(ticker, mut rows)| {
            rows.sort_by_key(|r| r.0);
            PriceSeries::new(ticker.clone(), rows).map(|s| (ticker, s))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct EarningsRow {
    pub ticker: String,
    pub fiscal_quarter_end: NaiveDate,
    pub report_date: NaiveDate,
    pub eps_actual: f64,
    pub eps_estimate: f64,
}

#[derive(Deserialize)]
struct EarningsRecord {
    ticker: String,
    fiscal_quarter_end: String,
    report_date: String,
    eps_actual: f64,
    eps_estimate: f64,
}

/// Earnings `{ticker, fiscal_quarter_end, report_date, eps_actual, eps_estimate}`,
/// returned sorted by (ticker, fiscal_quarter_end).
pub fn read_earnings<R: Read>(r: R) -> Result<Vec<EarningsRow>, MarketError> {
    const FILE: &str = "earnings";
    let mut out = Vec::new();
    for (i, rec) in reader(r).deserialize::<EarningsRecord>().enumerate() {
        let rec = rec.map_err(csv_err(FILE))?;
        out.push(EarningsRow {
            ticker: rec.ticker,
            fiscal_quarter_end: date_field(FILE, i + 2, &rec.fiscal_quarter_end)?,
            report_date: date_field(FILE, i + 2, &rec.report_date)?,
            eps_actual: rec.eps_actual,
            eps_estimate: rec.eps_estimate,
        });
    }
    out.sort_by(|a, b| (&a.ticker, a.fiscal_quarter_end).cmp(&(&b.ticker, b.fiscal_quarter_end)));
    Ok(out)
}

#[derive(Deserialize)]
struct FactorRecord {
    date: String,
    #[serde(rename = "MktRF", alias = "Mkt-RF")]
    mkt_rf: f64,
    #[serde(rename = "SMB")]
    smb: f64,
    #[serde(rename = "HML")]
    hml: f64,
    #[serde(rename = "RMW")]
    rmw: f64,
    #[serde(rename = "CMA")]
    cma: f64,
    #[serde(rename = "RF")]
    rf: f64,
}

/// Daily factors `{date, MktRF, SMB, HML, RMW, CMA, RF}` in percent, returned
/// as decimals.
pub fn read_factors<R: Read>(r: R) -> Result<Vec<FactorDay>, MarketError> {
    const FILE: &str = "factors";
    let mut out = Vec::new();
    for (i, rec) in reader(r).deserialize::<FactorRecord>().enumerate() {
        let rec = rec.map_err(csv_err(FILE))?;
        out.push(FactorDay {
            date: date_field(FILE, i + 2, &rec.date)?,
            mkt_rf: rec.mkt_rf / 100.0,
            smb: rec.smb / 100.0,
            hml: rec.hml / 100.0,
            rmw: rec.rmw / 100.0,
            cma: rec.cma / 100.0,
            rf: rec.rf / 100.0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prices_are_grouped_and_sorted() {
        let csv = "ticker,date,close\nB,2021-01-05,11\nA,2021-01-05,21\nA,2021-01-04,20\n";
        let p = read_prices(csv.as_bytes()).unwrap();
        assert_eq!(p.keys().collect::<Vec<_>>(), ["A", "B"]);
        assert_eq!(p["A"].closes(), &[20.0, 21.0]);
        assert!(read_prices("ticker,date,close\nA,2021-01-04,-1\n".as_bytes()).is_err());
        assert!(read_prices("ticker,date,close\nA,01/04/2021,1\n".as_bytes()).is_err());
    }

    #[test]
    fn factors_in_percent() {
        let csv = "date,MktRF,SMB,HML,RMW,CMA,RF\n20210104,1.5,0,0,0,0,0.01\n";
        let f = read_factors(csv.as_bytes()).unwrap();
        assert_eq!(f[0].date, NaiveDate::from_ymd_opt(2021, 1, 4).unwrap());
        assert!((f[0].mkt_rf - 0.015).abs() < 1e-15);
        assert!((f[0].rf - 0.0001).abs() < 1e-15);
    }

    #[test]
    fn earnings_rows() {
        let csv = "ticker,fiscal_quarter_end,report_date,eps_actual,eps_estimate\n\
                   X,2021-06-30,2021-07-28,1.1,1.0\nX,2021-03-31,2021-04-27,0.9,1.0\n";
        let e = read_earnings(csv.as_bytes()).unwrap();
        assert_eq!(e[0].fiscal_quarter_end, NaiveDate::from_ymd_opt(2021, 3, 31).unwrap());
        assert_eq!(e.len(), 2);
    }
}
