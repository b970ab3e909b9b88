//! Monthly information coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newey_west::{ic_lag, summarize_mean};
use super::rank::spearman;
use super::EconError;
use crate::panel::{Panel, YearMonth};

/// Minimum complete (signal, return) pairs for a month to enter the series.
pub const MIN_MONTHLY_OBS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcMonth {
    pub month: YearMonth,
    pub ic: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcSeries {
    pub signal: String,
    pub horizon: u32,
    pub months: Vec<IcMonth>,
    pub mean_ic: f64,
    pub t_nw: f64,
    pub p_value: f64,
    pub lag: usize,
    /// Total observations across qualifying months.
    pub n_obs: usize,
    /// Set when the NW variance is zero or only one month qualified.
    pub degenerate: bool,
    /// Months with data that were left out, with their complete-pair count.
    pub excluded: Vec<(YearMonth, usize)>,
}

impl IcSeries {
    pub fn n_months(&self) -> usize {
        self.months.len()
    }
}

/// Spearman IC per event month, then the NW mean of the monthly series.
///
/// Months with fewer than `min_obs` complete pairs, or with no rank
/// variation, are excluded.
pub fn monthly_ic(panel: &Panel, signal: &str, horizon: u32, min_obs: usize) -> Result<IcSeries, EconError> {
    let by_month: Vec<(YearMonth, Vec<(f64, f64)>)> = panel
        .by_month()
        .into_iter()
        .map(|(m, rows)| {
            let pairs = rows
                .iter()
                .filter_map(|r| Some((r.signal(signal)?, r.ret(horizon)?)))
                .collect();
            (m, pairs)
        })
        .collect();
    let results: Vec<(YearMonth, usize, Option<f64>)> = by_month
        .par_iter()
        .map(|(m, pairs)| {
            let n = pairs.len();
            if n < min_obs {
                return (*m, n, None);
            }
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            (*m, n, spearman(&x, &y))
        })
        .collect();

    let mut months = Vec::new();
    let mut excluded = Vec::new();
    for (month, n, ic) in results {
        match ic {
            Some(ic) => months.push(IcMonth { month, ic, n }),
            None => excluded.push((month, n)),
        }
    }
    for (m, n) in &excluded {
        log::debug!("ic {signal} h={horizon}: month {m} excluded (n={n})");
    }
    if months.is_empty() {
        return Err(EconError::NoQualifyingMonths {
            signal: signal.to_string(),
            min_obs,
        });
    }
    let series: Vec<f64> = months.iter().map(|m| m.ic).collect();
    let lag = ic_lag(series.len());
    let s = summarize_mean(&series, lag)?;
    Ok(IcSeries {
        signal: signal.to_string(),
        horizon,
        n_obs: months.iter().map(|m| m.n).sum(),
        months,
        mean_ic: s.mean,
        t_nw: s.t_stat,
        p_value: s.p_value,
        lag: s.lag,
        degenerate: s.degenerate,
        excluded,
    })
}
