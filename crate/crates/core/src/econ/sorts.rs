//! Quantile portfolio sorts.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::newey_west::normal_two_sided_p;
use super::EconError;
use crate::panel::{Panel, PanelRow, YearMonth};

/// Bucket boundaries for `n` sorted items in `q` buckets: `round(k·n/q)`,
/// halves rounded up, for `k = 0..=q`.
pub fn bucket_bounds(n: usize, q: usize) -> Vec<usize> {
    assert!(q > 0);
    (0..=q).map(|k| (2 * k * n + q) / (2 * q)).collect()
}

/// Bucket index (0-based) for each sorted position.
pub fn assign_buckets(n: usize, q: usize) -> Vec<usize> {
    let b = bucket_bounds(n, q);
    let mut out = Vec::with_capacity(n);
    for k in 0..q {
        out.extend(std::iter::repeat_n(k, b[k + 1] - b[k]));
    }
    out
}

fn row_order(a: &(f64, &PanelRow), b: &(f64, &PanelRow)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| a.1.ticker.cmp(&b.1.ticker))
        .then_with(|| a.1.call_id.cmp(&b.1.call_id))
}

/// Sort by `(key, ticker, call_id)` and split into `q` near-equal buckets.
pub fn sort_into_buckets<'a>(rows: &[(f64, &'a PanelRow)], q: usize) -> Vec<Vec<&'a PanelRow>> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(row_order);
    let b = bucket_bounds(sorted.len(), q);
    (0..q).map(|k| sorted[b[k]..b[k + 1]].iter().map(|x| x.1).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Pooled,
    Monthly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    /// 1-based bucket number, lowest signal first.
    pub bucket: usize,
    pub n: usize,
    pub mean_signal: f64,
    pub mean_return: f64,
    pub sd_return: f64,
    pub t_stat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SortResult {
    pub signal: String,
    pub horizon: u32,
    pub group_by: GroupBy,
    pub n: usize,
    pub buckets: Vec<BucketStats>,
    /// Mean return of the top bucket minus the bottom bucket.
    pub spread: f64,
    /// Unequal-variance two-sample t for the spread.
    pub spread_t: f64,
    pub spread_p: f64,
    /// Mean returns strictly increasing from bottom to top bucket.
    pub monotone: bool,
    pub skipped_groups: Vec<String>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    (mean, sd)
}

fn complete<'a>(rows: impl IntoIterator<Item = &'a PanelRow>, signal: &str, horizon: u32) -> Vec<(f64, &'a PanelRow)> {
    rows.into_iter()
        .filter(|r| r.ret(horizon).is_some())
        .filter_map(|r| Some((r.signal(signal)?, r)))
        .collect()
}

fn summarize(
    signal: &str,
    horizon: u32,
    group_by: GroupBy,
    buckets: Vec<Vec<&PanelRow>>,
    skipped_groups: Vec<String>,
) -> Result<SortResult, EconError> {
    let q = buckets.len();
    if buckets.iter().any(|b| b.is_empty()) {
        return Err(EconError::EmptySort {
            signal: signal.to_string(),
        });
    }
    let mut stats = Vec::with_capacity(q);
    let mut rets: Vec<Vec<f64>> = Vec::with_capacity(q);
    for (k, rows) in buckets.iter().enumerate() {
        let r: Vec<f64> = rows.iter().map(|x| x.ret(horizon).unwrap()).collect();
        let s: Vec<f64> = rows.iter().map(|x| x.signal(signal).unwrap()).collect();
        let (mean_return, sd_return) = mean_sd(&r);
        stats.push(BucketStats {
            bucket: k + 1,
            n: r.len(),
            mean_signal: mean_sd(&s).0,
            mean_return,
            sd_return,
            t_stat: mean_return / (sd_return / (r.len() as f64).sqrt()),
        });
        rets.push(r);
    }
    let (lo, hi) = (&stats[0], &stats[q - 1]);
    let spread = hi.mean_return - lo.mean_return;
    let se = (hi.sd_return.powi(2) / hi.n as f64 + lo.sd_return.powi(2) / lo.n as f64).sqrt();
    let spread_t = spread / se;
    Ok(SortResult {
        signal: signal.to_string(),
        horizon,
        group_by,
        n: stats.iter().map(|s| s.n).sum(),
        monotone: stats.windows(2).all(|w| w[1].mean_return > w[0].mean_return),
        spread,
        spread_t,
        spread_p: normal_two_sided_p(spread_t),
        buckets: stats,
        skipped_groups,
    })
}

fn bucket_sort<'a>(
    rows: Vec<&'a PanelRow>,
    signal: &str,
    horizon: u32,
    group_by: GroupBy,
    q: usize,
) -> (Vec<Vec<&'a PanelRow>>, Vec<String>) {
    let mut buckets: Vec<Vec<&PanelRow>> = vec![Vec::new(); q];
    let mut skipped = Vec::new();
    let groups: Vec<(String, Vec<&PanelRow>)> = match group_by {
        GroupBy::Pooled => vec![("pooled".to_string(), rows)],
        GroupBy::Monthly => {
            let mut by: std::collections::BTreeMap<YearMonth, Vec<&PanelRow>> = Default::default();
            for r in rows {
                by.entry(r.event_month()).or_default().push(r);
            }
            by.into_iter().map(|(m, v)| (m.to_string(), v)).collect()
        }
    };
    for (label, group) in groups {
        let obs = complete(group, signal, horizon);
        if obs.len() < q {
            log::debug!("sort {signal}: group {label} skipped ({} obs)", obs.len());
            skipped.push(label);
            continue;
        }
        for (k, b) in sort_into_buckets(&obs, q).into_iter().enumerate() {
            buckets[k].extend(b);
        }
    }
    (buckets, skipped)
}

/// Quintile sort on `signal` with per-quintile return statistics.
pub fn quintile_sort(panel: &Panel, signal: &str, horizon: u32, group_by: GroupBy) -> Result<SortResult, EconError> {
    let (buckets, skipped) = bucket_sort(panel.rows().iter().collect(), signal, horizon, group_by, 5);
    summarize(signal, horizon, group_by, buckets, skipped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TercileSort {
    /// 1-based tercile of the outer variable.
    pub tercile: usize,
    pub n: usize,
    pub mean_outer: f64,
    pub sort: SortResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleSortResult {
    pub outer: String,
    pub inner: String,
    pub horizon: u32,
    pub terciles: Vec<TercileSort>,
}

/// Pooled terciles on `outer`, then pooled quintiles on `inner` within each.
pub fn double_sort(panel: &Panel, outer: &str, inner: &str, horizon: u32) -> Result<DoubleSortResult, EconError> {
    let obs: Vec<(f64, &PanelRow)> = complete(panel.rows(), outer, horizon)
        .into_iter()
        .filter(|(_, r)| r.signal(inner).is_some())
        .collect();
    if obs.len() < 15 {
        return Err(EconError::EmptySort {
            signal: format!("{outer} x {inner}"),
        });
    }
    let mut terciles = Vec::with_capacity(3);
    for (t, rows) in sort_into_buckets(&obs, 3).into_iter().enumerate() {
        let mean_outer = mean_sd(&rows.iter().map(|r| r.signal(outer).unwrap()).collect::<Vec<_>>()).0;
        let n = rows.len();
        let (buckets, skipped) = bucket_sort(rows, inner, horizon, GroupBy::Pooled, 5);
        terciles.push(TercileSort {
            tercile: t + 1,
            n,
            mean_outer,
            sort: summarize(inner, horizon, GroupBy::Pooled, buckets, skipped)?,
        });
    }
    Ok(DoubleSortResult {
        outer: outer.to_string(),
        inner: inner.to_string(),
        horizon,
        terciles,
    })
}

/// Equal-weighted quintile returns for one month's cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyPortfolio {
    pub month: YearMonth,
    pub n: usize,
    pub bucket_returns: Vec<f64>,
    pub long_short: f64,
}

/// Monthly quintile portfolios, the input to the factor regressions.
/// Months with fewer than five complete observations are omitted.
pub fn monthly_portfolios(panel: &Panel, signal: &str, horizon: u32) -> Vec<MonthlyPortfolio> {
    let mut out = Vec::new();
    for (month, rows) in panel.by_month() {
        let obs = complete(rows, signal, horizon);
        if obs.len() < 5 {
            continue;
        }
        let bucket_returns: Vec<f64> = sort_into_buckets(&obs, 5)
            .iter()
            .map(|b| b.iter().map(|r| r.ret(horizon).unwrap()).sum::<f64>() / b.len() as f64)
            .collect();
        out.push(MonthlyPortfolio {
            month,
            n: obs.len(),
            long_short: bucket_returns[4] - bucket_returns[0],
            bucket_returns,
        });
    }
    out
}
