//! Five-factor time-series alpha.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::newey_west::{ff5_lag, normal_two_sided_p};
use super::ols::{hac_covariance, ols};
use super::EconError;
use crate::market::FactorMonth;
use crate::panel::YearMonth;

pub const FACTOR_NAMES: [&str; 5] = ["MktRF", "SMB", "HML", "RMW", "CMA"];
const MIN_MONTHS: usize = 12;

/// Whether portfolio returns still include the risk-free rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnBasis {
    /// Raw returns; RF is subtracted before the regression.
    Total,
    /// Already in excess of RF (e.g. a long-short spread).
    Excess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ff5Coef {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_nw: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ff5Result {
    pub alpha: Ff5Coef,
    pub loadings: Vec<Ff5Coef>,
    pub r_squared: f64,
    pub n_months: usize,
    pub lag: usize,
    pub residuals: Vec<f64>,
}

impl Ff5Result {
    pub fn alpha_monthly(&self) -> f64 {
        self.alpha.estimate
    }
}

/// OLS of portfolio excess returns on the five factors with an intercept,
/// NW (Bartlett, `⌊0.75·T^{1/3}⌋` lags) standard errors.
pub fn ff5_alpha(
    portfolio: &[(YearMonth, f64)],
    factors: &[FactorMonth],
    basis: ReturnBasis,
) -> Result<Ff5Result, EconError> {
    let by_month: BTreeMap<YearMonth, &FactorMonth> = factors.iter().map(|f| (f.month, f)).collect();
    let missing: Vec<YearMonth> = portfolio
        .iter()
        .map(|(m, _)| *m)
        .filter(|m| !by_month.contains_key(m))
        .collect();
    if !missing.is_empty() {
        return Err(EconError::Alignment { missing });
    }
    let t = portfolio.len();
    if t < MIN_MONTHS {
        return Err(EconError::TooFewObservations {
            needed: MIN_MONTHS,
            got: t,
        });
    }
    let rows: Vec<&FactorMonth> = portfolio.iter().map(|(m, _)| by_month[m]).collect();
    let y: Vec<f64> = portfolio
        .iter()
        .zip(&rows)
        .map(|((_, r), f)| match basis {
            ReturnBasis::Total => r - f.rf,
            ReturnBasis::Excess => *r,
        })
        .collect();
    let x = DMatrix::from_fn(t, 6, |i, j| if j == 0 { 1.0 } else { rows[i].factors()[j - 1] });
    let fit = ols(&y, &x)?;
    let lag = ff5_lag(t);
    let cov = hac_covariance(&x, &fit, lag);
    let coef = |j: usize, name: &str| {
        let se = cov[(j, j)].max(0.0).sqrt();
        let est = fit.coefficients[j];
        let t_nw = est / se;
        Ff5Coef {
            name: name.to_string(),
            estimate: est,
            std_error: se,
            t_nw,
            p_value: normal_two_sided_p(t_nw),
        }
    };
    Ok(Ff5Result {
        alpha: coef(0, "alpha"),
        loadings: FACTOR_NAMES.iter().enumerate().map(|(j, n)| coef(j + 1, n)).collect(),
        r_squared: fit.r_squared,
        n_months: t,
        lag,
        residuals: fit.residuals,
    })
}
