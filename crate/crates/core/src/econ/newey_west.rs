//! Newey-West (Bartlett kernel) inference on a time-series mean.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::EconError;

/// Lag rule for monthly IC and Fama-MacBeth series: `min{3, ⌊0.75·M^{1/3}⌋}`.
pub fn ic_lag(months: usize) -> usize {
    ff5_lag(months).min(3)
}

/// Lag rule for factor regressions: `⌊0.75·T^{1/3}⌋`, uncapped.
pub fn ff5_lag(months: usize) -> usize {
    (0.75 * (months as f64).cbrt()).floor() as usize
}

/// Two-sided p-value under the standard normal.
pub fn normal_two_sided_p(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    erfc(t.abs() / std::f64::consts::SQRT_2)
}

/// Bartlett weight for lag `l` at bandwidth `lag`.
pub fn bartlett(l: usize, lag: usize) -> f64 {
    1.0 - l as f64 / (lag as f64 + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NwMean {
    pub mean: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub lag: usize,
    pub n: usize,
    /// Set when the HAC variance is zero; `t_stat` is then ±∞ (or NaN for a
    /// zero mean) and must not be read as an ordinary statistic.
    pub degenerate: bool,
}

/// HAC t-test of the sample mean.
///
/// Autocovariances use the `M − 1` divisor, so at `lag = 0` the statistic is
/// exactly the classical one-sample t.
pub fn newey_west_mean(series: &[f64], lag: usize) -> Result<NwMean, EconError> {
    let m = series.len();
    if m < 2 {
        return Err(EconError::TooFewObservations { needed: 2, got: m });
    }
    let mean = series.iter().sum::<f64>() / m as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let denom = (m - 1) as f64;
    let autocov = |l: usize| dev[l..].iter().zip(&dev[..m - l]).map(|(a, b)| a * b).sum::<f64>() / denom;
    let gamma0 = autocov(0);
    let mut long_run = gamma0;
    for l in 1..=lag.min(m - 1) {
        long_run += 2.0 * bartlett(l, lag) * autocov(l);
    }
    let var = long_run / m as f64;
    let scale = series.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let degenerate = !(var > 0.0) || gamma0.sqrt() <= 1e-14 * scale;
    let (std_error, t_stat, p_value) = if degenerate {
        let t = if mean > 0.0 {
            f64::INFINITY
        } else if mean < 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        };
        (0.0, t, if t.is_nan() { f64::NAN } else { 0.0 })
    } else {
        let se = var.sqrt();
        let t = mean / se;
        (se, t, normal_two_sided_p(t))
    };
    Ok(NwMean {
        mean,
        std_error,
        t_stat,
        p_value,
        lag,
        n: m,
        degenerate,
    })
}

/// Like [`newey_west_mean`] but accepts a single observation, reporting its
/// value as the mean with undefined (NaN) inference and the degenerate flag set.
pub fn summarize_mean(series: &[f64], lag: usize) -> Result<NwMean, EconError> {
    match series {
        [] => Err(EconError::TooFewObservations { needed: 1, got: 0 }),
        [x] => Ok(NwMean {
            mean: *x,
            std_error: f64::NAN,
            t_stat: f64::NAN,
            p_value: f64::NAN,
            lag: 0,
            n: 1,
            degenerate: true,
        }),
        _ => newey_west_mean(series, lag),
    }
}
