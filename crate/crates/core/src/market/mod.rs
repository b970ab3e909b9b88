//! Prices, event-window returns, earnings surprises and factor data.

mod factors;
mod io;
mod returns;
mod sue;

pub use factors::{compound_monthly, FactorDay, FactorMonth};
pub use io::{parse_date, read_earnings, read_factors, read_prices, EarningsRow};
pub use returns::{event_return, event_window, EventReturn, EventWindow, MissingReason, PriceSeries};
pub use sue::{compute_sue, percentile, winsorize, winsorize_bounds, clip, SueMissing, SueRecord, MIN_SUE_HISTORY};

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("{ticker}: dates must be strictly increasing ({prev} then {next})")]
    UnorderedDates {
        ticker: String,
        prev: NaiveDate,
        next: NaiveDate,
    },
    #[error("{ticker}: non-positive close {close} on {date}")]
    NonPositivePrice {
        ticker: String,
        date: NaiveDate,
        close: f64,
    },
    #[error("duplicate date {0} in factor data")]
    DuplicateDate(NaiveDate),
    #[error("{file} row {row}: {message}")]
    Parse {
        file: String,
        row: usize,
        message: String,
    },
    #[error("{file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
}
