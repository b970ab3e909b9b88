//! Cumulative abnormal return paths by signal quintile.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sorts::sort_into_buckets;
use super::EconError;
use crate::market::{event_window, PriceSeries};
use crate::panel::{Panel, PanelRow};
use crate::transcript::Timing;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarPath {
    pub quintile: usize,
    pub n_events: usize,
    /// `path[k]` is the mean CAR through day `k` (day 0 = reaction day).
    pub path: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedEvent {
    pub call_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarProfile {
    pub signal: String,
    pub horizon_days: usize,
    pub quintiles: Vec<CarPath>,
    /// Top minus bottom quintile path.
    pub spread_path: Vec<f64>,
    pub excluded: Vec<ExcludedEvent>,
}

/// Daily abnormal returns for one event, days `0..horizon_days`.
///
/// Day 0 is the first session that can react: the event day for BMO calls,
/// the following day for AMC calls.
fn abnormal_returns(
    stock: &PriceSeries,
    benchmark: &PriceSeries,
    row: &PanelRow,
    horizon_days: usize,
) -> Result<Vec<f64>, String> {
    let w = event_window(stock, row.event_date, row.timing, 1).map_err(|e| e.to_string())?;
    let day0 = match w.effective_timing {
        Timing::Bmo => w.event_idx,
        Timing::Amc => w.event_idx + 1,
    };
    let last = day0 + horizon_days - 1;
    if last >= stock.len() {
        return Err("insufficient price history after the event".to_string());
    }
    (day0..=last)
        .map(|i| {
            let r = stock.daily_return(i).expect("day0 is past the first close");
            let date = stock.date(i);
            let b = benchmark
                .index_of(date)
                .and_then(|j| benchmark.daily_return(j))
                .ok_or_else(|| format!("benchmark has no return on {date}"))?;
            Ok(r - b)
        })
        .collect()
}

/// Mean CAR paths (summed daily abnormal returns) per signal quintile,
/// pooled across the panel.
pub fn car_profile(
    panel: &Panel,
    signal: &str,
    prices: &BTreeMap<String, PriceSeries>,
    benchmark: &PriceSeries,
    horizon_days: usize,
) -> Result<CarProfile, EconError> {
    assert!(horizon_days > 0);
    let mut excluded = Vec::new();
    let mut events: Vec<(f64, &PanelRow)> = Vec::new();
    let mut paths: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for row in panel.rows() {
        let Some(s) = row.signal(signal) else { continue };
        let res = prices
            .get(&row.ticker)
            .ok_or_else(|| format!("no prices for {}", row.ticker))
            .and_then(|p| abnormal_returns(p, benchmark, row, horizon_days));
        match res {
            Ok(ar) => {
                let mut acc = 0.0;
                let cum = ar
                    .iter()
                    .map(|a| {
                        acc += a;
                        acc
                    })
                    .collect();
                paths.insert(&row.call_id, cum);
                events.push((s, row));
            }
            Err(reason) => excluded.push(ExcludedEvent {
                call_id: row.call_id.clone(),
                reason,
            }),
        }
    }
    if events.len() < 5 {
        return Err(EconError::EmptySort {
            signal: signal.to_string(),
        });
    }
    let quintiles: Vec<CarPath> = sort_into_buckets(&events, 5)
        .iter()
        .enumerate()
        .map(|(k, rows)| {
            let mut mean = vec![0.0; horizon_days];
            for r in rows {
                for (m, v) in mean.iter_mut().zip(&paths[r.call_id.as_str()]) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
            CarPath {
                quintile: k + 1,
                n_events: rows.len(),
                path: mean,
            }
        })
        .collect();
    let spread_path = quintiles[4].path.iter().zip(&quintiles[0].path).map(|(a, b)| a - b).collect();
    Ok(CarProfile {
        signal: signal.to_string(),
        horizon_days,
        quintiles,
        spread_path,
        excluded,
    })
}
