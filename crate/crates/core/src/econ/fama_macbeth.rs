//! Fama-MacBeth cross-sectional regressions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newey_west::{ic_lag, summarize_mean};
use super::ols::{design_with_intercept, ols};
use super::EconError;
use crate::panel::{Panel, YearMonth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmCoef {
    pub name: String,
    pub gamma_bar: f64,
    pub std_error: f64,
    pub t_nw: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmResult {
    pub horizon: u32,
    pub intercept: FmCoef,
    pub slopes: Vec<FmCoef>,
    pub n_months: usize,
    /// Total observations across the months used.
    pub n_obs: usize,
    pub lag: usize,
    pub avg_r_squared: f64,
    /// Per-month slope vectors, in regressor order.
    pub monthly: Vec<(YearMonth, Vec<f64>)>,
    pub skipped: Vec<(YearMonth, String)>,
}

impl FmResult {
    pub fn slope(&self, name: &str) -> Option<&FmCoef> {
        self.slopes.iter().find(|c| c.name == name)
    }
}

/// Cross-sectional z-score with the sample standard deviation.
fn zscore(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if !(sd > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return None;
    }
    Some(v.iter().map(|x| (x - mean) / sd).collect())
}

enum MonthOutcome {
    Fit { coefs: Vec<f64>, n: usize, r2: f64 },
    Skip(String),
}

/// Regress the `horizon` return on the standardized `regressors`, month by
/// month, and average the coefficients with NW inference.
pub fn fama_macbeth(panel: &Panel, regressors: &[&str], horizon: u32) -> Result<FmResult, EconError> {
    let k = regressors.len();
    assert!(k > 0, "fama_macbeth needs at least one regressor");
    let months: Vec<(YearMonth, Vec<(f64, Vec<f64>)>)> = panel
        .by_month()
        .into_iter()
        .map(|(m, rows)| {
            let obs = rows
                .iter()
                .filter_map(|r| {
                    let y = r.ret(horizon)?;
                    let xs: Option<Vec<f64>> = regressors.iter().map(|s| r.signal(s)).collect();
                    Some((y, xs?))
                })
                .collect();
            (m, obs)
        })
        .collect();

    let outcomes: Vec<(YearMonth, MonthOutcome)> = months
        .par_iter()
        .map(|(m, obs)| {
            let n = obs.len();
            if n <= k + 1 {
                return (*m, MonthOutcome::Skip(format!("{n} observations for {k} regressors")));
            }
            let y: Vec<f64> = obs.iter().map(|o| o.0).collect();
            let mut cols = Vec::with_capacity(k);
            for j in 0..k {
                let raw: Vec<f64> = obs.iter().map(|o| o.1[j]).collect();
                match zscore(&raw) {
                    Some(z) => cols.push(z),
                    None => return (*m, MonthOutcome::Skip(format!("{} has zero variance", regressors[j]))),
                }
            }
            let col_refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            match ols(&y, &design_with_intercept(&col_refs)) {
                Ok(fit) => (
                    *m,
                    MonthOutcome::Fit {
                        coefs: fit.coefficients,
                        n,
                        r2: fit.r_squared,
                    },
                ),
                Err(e) => (*m, MonthOutcome::Skip(e.to_string())),
            }
        })
        .collect();

    let mut monthly = Vec::new();
    let mut skipped = Vec::new();
    let mut n_obs = 0;
    let mut r2_sum = 0.0;
    for (m, o) in outcomes {
        match o {
            MonthOutcome::Fit { coefs, n, r2 } => {
                n_obs += n;
                r2_sum += r2;
                monthly.push((m, coefs));
            }
            MonthOutcome::Skip(why) => {
                log::info!("fama-macbeth: skipping {m}: {why}");
                skipped.push((m, why));
            }
        }
    }
    if monthly.is_empty() {
        return Err(EconError::AllMonthsSkipped { months: skipped.len() });
    }
    let lag = ic_lag(monthly.len());
    let mut coefs = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let series: Vec<f64> = monthly.iter().map(|(_, c)| c[j]).collect();
        let s = summarize_mean(&series, lag)?;
        coefs.push(FmCoef {
            name: if j == 0 { "intercept".to_string() } else { regressors[j - 1].to_string() },
            gamma_bar: s.mean,
            std_error: s.std_error,
            t_nw: s.t_stat,
            p_value: s.p_value,
        });
    }
    let intercept = coefs.remove(0);
    Ok(FmResult {
        horizon,
        intercept,
        slopes: coefs,
        n_months: monthly.len(),
        n_obs,
        lag,
        avg_r_squared: r2_sum / monthly.len() as f64,
        monthly: monthly.into_iter().map(|(m, c)| (m, c[1..].to_vec())).collect(),
        skipped,
    })
}
