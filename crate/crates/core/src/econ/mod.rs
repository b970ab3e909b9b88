//! Statistical tests on the call panel.

mod car;
mod decay;
mod fama_macbeth;
mod ff5;
mod ic;
mod newey_west;
mod ols;
mod rank;
pub mod report;
mod sorts;

pub use car::{car_profile, CarPath, CarProfile, ExcludedEvent};
pub use decay::{decay_profile, DecayPoint, DecayProfile};
pub use fama_macbeth::{fama_macbeth, FmCoef, FmResult};
pub use ff5::{ff5_alpha, Ff5Coef, Ff5Result, ReturnBasis, FACTOR_NAMES};
pub use ic::{monthly_ic, IcMonth, IcSeries, MIN_MONTHLY_OBS};
pub use newey_west::{bartlett, ff5_lag, ic_lag, newey_west_mean, normal_two_sided_p, summarize_mean, NwMean};
pub use ols::{design_with_intercept, hac_covariance, ols, OlsFit};
pub use rank::{average_ranks, pearson, spearman, spearman_pairs};
pub use sorts::{
    assign_buckets, bucket_bounds, double_sort, monthly_portfolios, quintile_sort, sort_into_buckets, BucketStats,
    DoubleSortResult, GroupBy, MonthlyPortfolio, SortResult, TercileSort,
};

use thiserror::Error;

use crate::panel::YearMonth;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconError {
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("design matrix is rank deficient at column {column}")]
    Singular { column: usize },
    #[error("design has {rows} rows but {cols} columns")]
    Underdetermined { rows: usize, cols: usize },
    #[error("no qualifying months for {signal} (each month needs at least {min_obs} observations)")]
    NoQualifyingMonths { signal: String, min_obs: usize },
    #[error("all {months} monthly cross-sections were skipped")]
    AllMonthsSkipped { months: usize },
    #[error("factor data missing for months: {}", fmt_months(.missing))]
    Alignment { missing: Vec<YearMonth> },
    #[error("no sort group has enough observations for {signal}")]
    EmptySort { signal: String },
    #[error("signal {0} not present in the panel")]
    UnknownSignal(String),
}

fn fmt_months(m: &[YearMonth]) -> String {
    m.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}
