use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::MarketError;
use crate::panel::YearMonth;

/// One day of factor returns, as decimals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorDay {
    pub date: NaiveDate,
    pub mkt_rf: f64,
    pub smb: f64,
    pub hml: f64,
    pub rmw: f64,
    pub cma: f64,
    pub rf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorMonth {
    pub month: YearMonth,
    pub mkt_rf: f64,
    pub smb: f64,
    pub hml: f64,
    pub rmw: f64,
    pub cma: f64,
    pub rf: f64,
}

impl FactorMonth {
    /// `[MktRF, SMB, HML, RMW, CMA]`.
    pub fn factors(&self) -> [f64; 5] {
        [self.mkt_rf, self.smb, self.hml, self.rmw, self.cma]
    }
}

impl FactorDay {
    fn values(&self) -> [f64; 6] {
        [self.mkt_rf, self.smb, self.hml, self.rmw, self.cma, self.rf]
    }
}

/// Compound daily factors to calendar months: `Π(1 + x) − 1` per column.
pub fn compound_monthly(daily: &[FactorDay]) -> Result<Vec<FactorMonth>, MarketError> {
    let mut rows = daily.to_vec();
    rows.sort_by_key(|r| r.date);
    if let Some(w) = rows.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(MarketError::DuplicateDate(w[0].date));
    }
    let mut out: Vec<FactorMonth> = Vec::new();
    let mut acc = [1.0f64; 6];
    let mut current: Option<YearMonth> = None;
    let flush = |month: YearMonth, acc: &[f64; 6], out: &mut Vec<FactorMonth>| {
        out.push(FactorMonth {
            month,
            mkt_rf: acc[0] - 1.0,
            smb: acc[1] - 1.0,
            hml: acc[2] - 1.0,
            rmw: acc[3] - 1.0,
            cma: acc[4] - 1.0,
            rf: acc[5] - 1.0,
        })
    };
    for r in &rows {
        let m = YearMonth::of(r.date);
        if current != Some(m) {
            if let Some(prev) = current {
                flush(prev, &acc, &mut out);
            }
            current = Some(m);
            acc = [1.0; 6];
        }
        for (a, v) in acc.iter_mut().zip(r.values()) {
            *a *= 1.0 + v;
        }
    }
    if let Some(prev) = current {
        flush(prev, &acc, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(y: i32, m: u32, d: u32, x: f64) -> FactorDay {
        FactorDay {
            date: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
            mkt_rf: x,
            smb: 0.0,
            hml: -x,
            rmw: 0.0,
            cma: 0.0,
            rf: 0.0001,
        }
    }

    #[test]
    fn compounding() {
        let months = compound_monthly(&[day(2021, 1, 4, 0.01), day(2021, 1, 5, 0.01)]).unwrap();
        assert_eq!(months.len(), 1);
        assert!((months[0].mkt_rf - 0.0201).abs() < 1e-15);
        assert!((months[0].hml - (0.99f64 * 0.99 - 1.0)).abs() < 1e-15);

        let zeros: Vec<_> = (1..=21).map(|d| day(2021, 3, d, 0.0)).collect();
        assert_eq!(compound_monthly(&zeros).unwrap()[0].mkt_rf, 0.0);
    }

    #[test]
    fn empty_months_are_omitted_and_order_is_irrelevant() {
        let rows = vec![day(2021, 4, 2, 0.02), day(2021, 1, 5, 0.01), day(2021, 1, 4, -0.01)];
        let a = compound_monthly(&rows).unwrap();
        let mut rev = rows.clone();
        rev.reverse();
        assert_eq!(a, compound_monthly(&rev).unwrap());
        assert_eq!(a.iter().map(|m| m.month.to_string()).collect::<Vec<_>>(), ["2021-01", "2021-04"]);
    }

    #[test]
    fn duplicate_dates_rejected() {
        let err = compound_monthly(&[day(2021, 1, 4, 0.0), day(2021, 1, 4, 0.1)]).unwrap_err();
        assert!(matches!(err, MarketError::DuplicateDate(_)));
    }
}
