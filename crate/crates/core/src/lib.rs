//! Speaker-aware sentiment signals from earnings-call transcripts, and the
//! econometric tests used to evaluate them.
//!
//! The crate is organised by stage:
//!
//! - [`transcript`]: parse records, classify speakers, segment sentences.
//! - [`lexicon`]: dictionary tone scoring.
//! - [`aggregate`]: the five call-level aggregates and IC-derived role weights.
//! - [`market`]: event returns, SUE, factor data.
//! - [`panel`]: the call-level table every test consumes.
//! - [`econ`]: IC, Fama-MacBeth, five-factor alpha, sorts, CAR, decay.
//! - [`synth`]: seeded synthetic panels with known ground truth.
//! - [`pipeline`]: glue from input files to a panel.

pub mod aggregate;
pub mod econ;
pub mod lexicon;
pub mod market;
pub mod panel;
pub mod pipeline;
pub mod synth;
pub mod transcript;

pub use aggregate::{CallSentiment, Method, SectionWeights, SentenceScore};
pub use econ::{Ff5Result, FmResult, IcSeries, SortResult};
pub use lexicon::{Lexicon, LmScore};
pub use market::{EventReturn, FactorMonth, PriceSeries, SueRecord};
pub use panel::{Panel, PanelRow, YearMonth};
pub use transcript::{RawSentence, SpeakerRole, SpeakerTurn, Timing};
