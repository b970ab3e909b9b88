use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::MarketError;
use crate::transcript::Timing;

/// Adjusted closes for one ticker, dates strictly increasing, closes > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, rows: Vec<(NaiveDate, f64)>) -> Result<Self, MarketError> {
        let ticker = ticker.into();
        for w in rows.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(MarketError::UnorderedDates {
                    ticker,
                    prev: w[0].0,
                    next: w[1].0,
                });
            }
        }
        if let Some(&(date, close)) = rows.iter().find(|(_, c)| !(*c > 0.0) || !c.is_finite()) {
            return Err(MarketError::NonPositivePrice { ticker, date, close });
        }
        let (dates, closes) = rows.into_iter().unzip();
        Ok(Self { ticker, dates, closes })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn close(&self, idx: usize) -> f64 {
        self.closes[idx]
    }

    pub fn date(&self, idx: usize) -> NaiveDate {
        self.dates[idx]
    }

    /// Index of the first trading day on or after `date`.
    pub fn index_on_or_after(&self, date: NaiveDate) -> Option<usize> {
        let i = self.dates.partition_point(|d| *d < date);
        (i < self.dates.len()).then_some(i)
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Simple return from the previous trading day's close to `idx`.
    pub fn daily_return(&self, idx: usize) -> Option<f64> {
        (idx > 0 && idx < self.closes.len()).then(|| self.closes[idx] / self.closes[idx - 1] - 1.0)
    }

    /// Same series with every close multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            ticker: self.ticker.clone(),
            dates: self.dates.clone(),
            closes: self.closes.iter().map(|c| c * k).collect(),
        }
    }
}

/// Why an event return could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingReason {
    /// No trading day on or after the call date.
    NoEventDay,
    /// No close before the event day to anchor the window.
    NoPriorClose,
    /// The window runs past the last available close.
    WindowBeyondData,
}

impl std::fmt::Display for MissingReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MissingReason::NoEventDay => "no trading day on or after the call date",
            MissingReason::NoPriorClose => "no close before the event day",
            MissingReason::WindowBeyondData => "event window extends past available prices",
        })
    }
}

/// Resolved window, as indices into the price series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventWindow {
    /// Trading day `t` (the call date, rolled forward if needed).
    pub event_idx: usize,
    pub start_idx: usize,
    pub end_idx: usize,
    /// Timing after the non-trading-day roll (a rolled call counts as BMO).
    pub effective_timing: Timing,
}

/// Window for a forward return of `horizon_days` trading days.
///
/// Starts at close(t−1). AMC ends at close(t+h); BMO ends at close(t+h−1).
/// A call dated on a non-trading day is moved to the next trading day and
/// treated as BMO relative to it.
pub fn event_window(
    prices: &PriceSeries,
    call_date: NaiveDate,
    timing: Timing,
    horizon_days: u32,
) -> Result<EventWindow, MissingReason> {
    assert!(horizon_days >= 1, "horizon must be at least one trading day");
    let t = prices.index_on_or_after(call_date).ok_or(MissingReason::NoEventDay)?;
    let rolled = prices.date(t) != call_date;
    let effective_timing = if rolled { Timing::Bmo } else { timing };
    if t == 0 {
        return Err(MissingReason::NoPriorClose);
    }
    let h = horizon_days as usize;
    let end_idx = match effective_timing {
        Timing::Amc => t + h,
        Timing::Bmo => t + h - 1,
    };
    if end_idx >= prices.len() {
        return Err(MissingReason::WindowBeyondData);
    }
    Ok(EventWindow {
        event_idx: t,
        start_idx: t - 1,
        end_idx,
        effective_timing,
    })
}

/// Simple return `close(end) / close(start) − 1` over the event window.
pub fn event_return(
    prices: &PriceSeries,
    call_date: NaiveDate,
    timing: Timing,
    horizon_days: u32,
) -> Result<f64, MissingReason> {
    let w = event_window(prices, call_date, timing, horizon_days)?;
    Ok(prices.close(w.end_idx) / prices.close(w.start_idx) - 1.0)
}

/// One- and five-day event returns for a call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReturn {
    pub call_id: String,
    pub r_1d: Option<f64>,
    pub r_5d: Option<f64>,
    pub window_start: Option<NaiveDate>,
    pub window_end_1d: Option<NaiveDate>,
    pub window_end_5d: Option<NaiveDate>,
    pub timing: Timing,
}

impl EventReturn {
    pub fn compute(call_id: &str, prices: &PriceSeries, call_date: NaiveDate, timing: Timing) -> Self {
        let w1 = event_window(prices, call_date, timing, 1).ok();
        let w5 = event_window(prices, call_date, timing, 5).ok();
        let ret = |w: Option<EventWindow>| w.map(|w| prices.close(w.end_idx) / prices.close(w.start_idx) - 1.0);
        Self {
            call_id: call_id.to_string(),
            r_1d: ret(w1),
            r_5d: ret(w5),
            window_start: w1.or(w5).map(|w| prices.date(w.start_idx)),
            window_end_1d: w1.map(|w| prices.date(w.end_idx)),
            window_end_5d: w5.map(|w| prices.date(w.end_idx)),
            timing: w1.or(w5).map_or(timing, |w| w.effective_timing),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    /// Ten weekdays starting Monday 2021-03-01.
    fn series(closes: &[f64]) -> PriceSeries {
        let mut date = d(2021, 3, 1);
        let mut rows = Vec::new();
        for &c in closes {
            rows.push((date, c));
            date += Duration::days(if date.format("%a").to_string() == "Fri" { 3 } else { 1 });
        }
        PriceSeries::new("T", rows).unwrap()
    }

    #[test]
    fn flat_prices_give_zero() {
        let p = series(&[100.0; 12]);
        for timing in [Timing::Amc, Timing::Bmo] {
            for h in [1, 5] {
                assert_eq!(event_return(&p, d(2021, 3, 2), timing, h), Ok(0.0));
            }
        }
    }

    #[test]
    fn amc_and_bmo_windows() {
        // index: 0=Mon 3/1 (t-1), 1=Tue 3/2 (t), 2=Wed 3/3 (t+1)
        let p = series(&[100.0, 98.0, 103.0, 101.0, 99.0, 104.0, 110.0, 100.0]);
        let amc = event_return(&p, d(2021, 3, 2), Timing::Amc, 1).unwrap();
        assert!((amc - 0.03).abs() < 1e-12);
        let bmo = event_return(&p, d(2021, 3, 2), Timing::Bmo, 1).unwrap();
        assert!((bmo + 0.02).abs() < 1e-12);
        // 5-day: AMC ends t+5 (idx 6), BMO ends t+4 (idx 5)
        let w = event_window(&p, d(2021, 3, 2), Timing::Amc, 5).unwrap();
        assert_eq!((w.start_idx, w.end_idx), (0, 6));
        let w = event_window(&p, d(2021, 3, 2), Timing::Bmo, 5).unwrap();
        assert_eq!((w.start_idx, w.end_idx), (0, 5));
    }

    #[test]
    fn weekend_call_rolls_forward_as_bmo() {
        // Saturday 3/6 rolls to Monday 3/8 (idx 5); window idx 4 -> 5
        let p = series(&[100.0, 100.0, 100.0, 100.0, 100.0, 90.0, 80.0, 70.0]);
        let w = event_window(&p, d(2021, 3, 6), Timing::Amc, 1).unwrap();
        assert_eq!(w.effective_timing, Timing::Bmo);
        assert_eq!((w.start_idx, w.end_idx), (4, 5));
        assert!((event_return(&p, d(2021, 3, 6), Timing::Amc, 1).unwrap() + 0.1).abs() < 1e-12);
    }

    #[test]
    fn missing_reasons() {
        let p = series(&[100.0, 101.0, 102.0]);
        assert_eq!(event_return(&p, d(2021, 3, 1), Timing::Bmo, 1), Err(MissingReason::NoPriorClose));
        assert_eq!(event_return(&p, d(2021, 3, 3), Timing::Amc, 1), Err(MissingReason::WindowBeyondData));
        assert_eq!(event_return(&p, d(2022, 1, 1), Timing::Amc, 1), Err(MissingReason::NoEventDay));
        let e = EventReturn::compute("c", &p, d(2021, 3, 2), Timing::Amc);
        assert!(e.r_1d.is_some() && e.r_5d.is_none());
    }

    #[test]
    fn price_validation() {
        assert!(matches!(
            PriceSeries::new("T", vec![(d(2021, 1, 4), 10.0), (d(2021, 1, 5), 0.0)]),
            Err(MarketError::NonPositivePrice { .. })
        ));
        assert!(matches!(
            PriceSeries::new("T", vec![(d(2021, 1, 5), 10.0), (d(2021, 1, 5), 11.0)]),
            Err(MarketError::UnorderedDates { .. })
        ));
    }

    #[test]
    fn scaling_prices_leaves_returns_unchanged() {
        let p = series(&[100.0, 98.0, 103.0, 101.0, 99.0, 104.0, 110.0, 100.0]);
        let q = p.scaled(2.0);
        for timing in [Timing::Amc, Timing::Bmo] {
            for h in [1, 5] {
                let a = event_return(&p, d(2021, 3, 2), timing, h).unwrap();
                let b = event_return(&q, d(2021, 3, 2), timing, h).unwrap();
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
