//! Seeded synthetic panels with known generating parameters.
//!
//! Sentences are drawn per role so that call-level aggregates have chosen
//! moments; forward returns are tied to a driver signal through a Gaussian
//! copula on within-month normal scores (or, in linear mode, through fixed
//! slopes on z-scored signals). Everything comes from one ChaCha8 stream, so
//! a config fully determines the panel.

mod calibrate;
mod config;
mod ff5;
mod files;

pub use calibrate::{calibrate_to_table3, panel_moments, Moments, TABLE3_MOMENTS, TABLE3_RETURN_SD};
pub use config::SynthConfig;
pub use ff5::{generate_ff5, Ff5Sample};
pub use files::{write_ingestion_files, SynthFiles, BENCHMARK_TICKER};

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::aggregate::{CallSentiment, ScoredSentence, EXTREME_THRESHOLD};
use crate::market::{compute_sue, winsorize_bounds};
use crate::panel::{Panel, PanelRow, YearMonth};
use crate::transcript::{SpeakerRole, Timing};

pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64; normals from rand_distr 0.5 StandardNormal";

/// Mean absolute net score of an extreme sentence (`|τ| ~ U(0.7, 1)`).
const EXTREME_MAGNITUDE: f64 = 0.85;
const RETURN_FLOOR: f64 = -0.9;
const WARMUP_QUARTERS: usize = 4;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error("calibration did not converge: {0}")]
    Calibration(String),
    #[error("writing synthetic files: {0}")]
    Io(#[from] std::io::Error),
}

/// Pearson correlation of a bivariate normal whose Spearman correlation is `ic`.
pub fn copula_correlation(ic: f64) -> f64 {
    2.0 * (std::f64::consts::PI * ic / 6.0).sin()
}

/// The exact parameters a panel was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub generator: String,
    pub seed: u64,
    pub mode: String,
    /// Target IC per horizon `1..=max_horizon`.
    pub ic_schedule: Vec<f64>,
    /// Copula correlation per horizon.
    pub copula_correlation: Vec<f64>,
    pub true_weights: [f64; 4],
    pub fm_slopes: BTreeMap<String, f64>,
    pub n_calls: usize,
    pub config: SynthConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stratum {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SynthSentence {
    pub role: SpeakerRole,
    pub stratum: Stratum,
    pub p_pos: f64,
    pub p_neg: f64,
    pub p_neu: f64,
}

impl ScoredSentence for SynthSentence {
    fn role(&self) -> SpeakerRole {
        self.role
    }
    fn net(&self) -> f64 {
        self.p_pos - self.p_neg
    }
    fn confidence(&self) -> f64 {
        1.0 - self.p_neu
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SynthCall {
    pub call_id: String,
    pub ticker: String,
    pub date: NaiveDate,
    pub timing: Timing,
    pub sentences: Vec<SynthSentence>,
    pub sentiment: CallSentiment,
    /// Returns for horizons `1..=max_horizon`.
    pub returns: Vec<f64>,
    pub sue: Option<f64>,
    pub quarter_end: NaiveDate,
    pub eps: (f64, f64),
}

#[derive(Debug, Clone)]
pub(crate) struct WarmupQuarter {
    pub ticker: String,
    pub report_date: NaiveDate,
    pub quarter_end: NaiveDate,
    pub eps: (f64, f64),
}

pub(crate) struct Simulation {
    pub calls: Vec<SynthCall>,
    pub warmup: Vec<WarmupQuarter>,
    pub truth: GroundTruth,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn month_offset(start: YearMonth, k: i64) -> YearMonth {
    let idx = start.year as i64 * 12 + start.month as i64 - 1 + k;
    YearMonth::new(idx.div_euclid(12) as i32, idx.rem_euclid(12) as u32 + 1)
}

fn weekdays(month: YearMonth) -> Vec<NaiveDate> {
    let mut d = month.first_day();
    let mut out = Vec::new();
    while d.month() == month.month {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().unwrap();
    }
    out
}

fn last_day_before(month: YearMonth) -> NaiveDate {
    month.first_day().pred_opt().unwrap()
}

fn ticker_name(i: usize) -> String {
    format!("T{i:04}")
}

/// Sentences for one role on one call whose mean net score is close to `target`.
///
/// A share `e` of sentences are extreme; the signed extreme balance `d` is
/// chosen so that `0.85·d + τ0·(1 − e) ≈ target`, and stratum counts are
/// rounded rather than sampled to keep within-call noise small.
fn role_sentences(rng: &mut ChaCha8Rng, role: SpeakerRole, n: usize, target: f64, e: f64, tau0: f64, conf: f64) -> Vec<SynthSentence> {
    let d = ((target - tau0 * (1.0 - e)) / EXTREME_MAGNITUDE).clamp(-e, e);
    let mut n_pos = (n as f64 * (e + d) / 2.0).round() as usize;
    let mut n_neg = (n as f64 * (e - d) / 2.0).round() as usize;
    while n_pos + n_neg > n {
        if n_pos >= n_neg {
            n_pos -= 1;
        } else {
            n_neg -= 1;
        }
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let stratum = if k < n_pos {
            Stratum::Positive
        } else if k < n_pos + n_neg {
            Stratum::Negative
        } else {
            Stratum::Neutral
        };
        let (tau, c): (f64, f64) = match stratum {
            Stratum::Neutral => {
                let tau = tau0 + 0.3 * (rng.random::<f64>() - 0.5);
                (tau, tau.abs() + 2.0 * conf * rng.random::<f64>())
            }
            _ => {
                let mag = 0.7 + 0.3 * rng.random::<f64>();
                let c = mag + (1.0 - mag) * (0.5 + 0.5 * rng.random::<f64>());
                (if stratum == Stratum::Positive { mag } else { -mag }, c)
            }
        };
        out.push(SynthSentence {
            role,
            stratum,
            p_pos: (c + tau) / 2.0,
            p_neg: (c - tau) / 2.0,
            p_neu: 1.0 - c,
        });
    }
    out
}

fn call_sentences(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<SynthSentence> {
    let lo = cfg.mean_sentences / 2;
    let hi = cfg.mean_sentences * 3 / 2;
    let n = rng.random_range(lo..=hi);
    let mut present = [false; 4];
    for (g, p) in present.iter_mut().zip(cfg.presence) {
        *g = rng.random::<f64>() < p;
    }
    if !present.iter().any(|x| *x) {
        present[2] = true;
    }
    let cond: Vec<f64> = (0..4)
        .map(|g| {
            if present[g] && cfg.presence[g] > 0.0 {
                cfg.sentence_share[g] / cfg.presence[g]
            } else if present[g] {
                cfg.sentence_share[g]
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = cond.iter().sum();
    let common: f64 = normal(rng);
    let mut out = Vec::with_capacity(hi + 4);
    for (g, role) in SpeakerRole::GROUPS.iter().enumerate() {
        if !present[g] {
            continue;
        }
        let share = if total > 0.0 { cond[g] / total } else { 0.25 };
        let n_g = ((n as f64 * share).round() as usize).max(1);
        let z = cfg.kappa.sqrt() * common + (1.0 - cfg.kappa).sqrt() * normal(rng);
        let target = cfg.role_means[g] + cfg.role_sd[g] * z;
        out.extend(role_sentences(rng, *role, n_g, target, cfg.extreme_share[g], cfg.neutral_tone, cfg.neutral_confidence));
    }
    out
}

/// Normal scores `Φ⁻¹((rank − 0.5)/n)` of the present values; ties broken by
/// position. Missing entries get an independent standard normal.
fn normal_scores(rng: &mut ChaCha8Rng, values: &[Option<f64>]) -> Vec<f64> {
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    idx.sort_by(|&a, &b| values[a].unwrap().total_cmp(&values[b].unwrap()).then(a.cmp(&b)));
    let n = idx.len() as f64;
    let mut out = vec![f64::NAN; values.len()];
    for (r, &i) in idx.iter().enumerate() {
        out[i] = std.inverse_cdf((r as f64 + 0.5) / n);
    }
    for v in out.iter_mut() {
        if v.is_nan() {
            *v = normal(rng);
        }
    }
    out
}

/// Within-sample z-scores with sample sd; missing or degenerate → 0.
fn zscores(values: &[Option<f64>]) -> Vec<f64> {
    let xs: Vec<f64> = values.iter().flatten().copied().collect();
    if xs.len() < 2 {
        return vec![0.0; values.len()];
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    values
        .iter()
        .map(|v| match v {
            Some(x) if sd > 0.0 => (x - mean) / sd,
            _ => 0.0,
        })
        .collect()
}

fn signal_value(call: &SynthCall, name: &str) -> Option<f64> {
    match name {
        "sue" => call.sue,
        "m1" => call.sentiment.m1,
        "m2" => call.sentiment.m2,
        "m3" => call.sentiment.m3,
        "m4" => call.sentiment.m4,
        "m5" => call.sentiment.m5,
        other => other
            .strip_prefix("role_")
            .and_then(|r| r.parse::<SpeakerRole>().ok())
            .and_then(|r| call.sentiment.role_means.get(r)),
    }
}

fn known_signal(name: &str) -> bool {
    matches!(name, "sue" | "m1" | "m2" | "m3" | "m4" | "m5")
        || name
            .strip_prefix("role_")
            .and_then(|r| r.parse::<SpeakerRole>().ok())
            .is_some_and(|r| r.group_index().is_some())
}

fn month_returns(rng: &mut ChaCha8Rng, cfg: &SynthConfig, calls: &mut [SynthCall], corr: &[f64]) {
    let h_max = cfg.max_horizon as usize;
    let sd_h: Vec<f64> = (0..h_max)
        .map(|k| (cfg.noise_sd.powi(2) + k as f64 * cfg.later_day_sd.powi(2)).sqrt())
        .collect();
    let mean_h: Vec<f64> = (0..h_max).map(|k| cfg.return_mean + k as f64 * cfg.later_day_mean).collect();
    if cfg.linear_mode() {
        let z: Vec<(f64, Vec<f64>)> = cfg
            .fm_slopes
            .iter()
            .map(|(name, slope)| (*slope, zscores(&calls.iter().map(|c| signal_value(c, name)).collect::<Vec<_>>())))
            .collect();
        for (i, call) in calls.iter_mut().enumerate() {
            let r1 = cfg.return_mean + z.iter().map(|(s, zs)| s * zs[i]).sum::<f64>() + cfg.noise_sd * normal(rng);
            let mut walk = 0.0;
            call.returns = (0..h_max)
                .map(|k| {
                    if k > 0 {
                        walk += cfg.later_day_sd * normal(rng);
                    }
                    (r1 + k as f64 * cfg.later_day_mean + walk).max(RETURN_FLOOR)
                })
                .collect();
        }
        return;
    }
    let u = normal_scores(rng, &calls.iter().map(|c| signal_value(c, &cfg.driver)).collect::<Vec<_>>());
    let b = copula_correlation(cfg.sue_ic);
    let v = if b != 0.0 {
        normal_scores(rng, &calls.iter().map(|c| c.sue).collect::<Vec<_>>())
    } else {
        vec![0.0; calls.len()]
    };
    for (i, call) in calls.iter_mut().enumerate() {
        let mut cum = 0.0;
        call.returns = (0..h_max)
            .map(|k| {
                let sd = if k == 0 { cfg.noise_sd } else { cfg.later_day_sd };
                cum += sd * normal(rng);
                let e = cum / sd_h[k];
                let a = corr[k];
                let c = (1.0 - a * a - b * b).max(0.0).sqrt();
                (mean_h[k] + sd_h[k] * (a * u[i] + b * v[i] + c * e)).max(RETURN_FLOOR)
            })
            .collect();
    }
}

pub(crate) fn simulate(cfg: &SynthConfig) -> Result<Simulation, SynthError> {
    cfg.validate()?;
    if !cfg.linear_mode() && !known_signal(&cfg.driver) {
        return Err(SynthError::InvalidConfig(format!("unknown driver signal {:?}", cfg.driver)));
    }
    if let Some(bad) = cfg.fm_slopes.keys().find(|k| !known_signal(k)) {
        return Err(SynthError::InvalidConfig(format!("unknown fm_slopes signal {bad:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cpm = cfg.calls_per_month;
    let n_tickers = 3 * cpm;
    let schedule = cfg.resolved_schedule();
    let corr: Vec<f64> = schedule.iter().map(|ic| copula_correlation(*ic)).collect();
    let wsum: f64 = cfg.true_weights.iter().sum();
    let weights = cfg.true_weights.map(|w| w / wsum);

    struct Firm {
        level: f64,
        sigma: f64,
        history: Vec<(f64, f64)>,
    }
    let draw_eps = |rng: &mut ChaCha8Rng, f: &Firm| {
        let estimate = f.level + 0.1 * normal(rng);
        (estimate + f.sigma * (1.0 + normal(rng)), estimate)
    };
    let mut firms = Vec::with_capacity(n_tickers);
    let mut warmup = Vec::new();
    for i in 0..n_tickers {
        let mut firm = Firm {
            level: 0.5 + 2.5 * rng.random::<f64>(),
            sigma: 0.02 + 0.18 * rng.random::<f64>(),
            history: Vec::new(),
        };
        let group = (i / cpm) as i64;
        for q in (1..=WARMUP_QUARTERS as i64).rev() {
            let month = month_offset(cfg.start_month, group - 3 * q);
            let days = weekdays(month);
            let report_date = days[rng.random_range(0..days.len())];
            let eps = draw_eps(&mut rng, &firm);
            firm.history.push(eps);
            warmup.push(WarmupQuarter {
                ticker: ticker_name(i),
                report_date,
                quarter_end: last_day_before(month),
                eps,
            });
        }
        firms.push(firm);
    }

    let mut calls = Vec::with_capacity(cfg.n_months * cpm);
    for m in 0..cfg.n_months {
        let month = month_offset(cfg.start_month, m as i64);
        let days = weekdays(month);
        let group = m % 3;
        let mut month_calls = Vec::with_capacity(cpm);
        for j in 0..cpm {
            let t = group * cpm + j;
            let ticker = ticker_name(t);
            let date = days[rng.random_range(0..days.len())];
            let timing = if rng.random::<bool>() { Timing::Amc } else { Timing::Bmo };
            let sentences = call_sentences(&mut rng, cfg);
            let call_id = format!("{ticker}-{}", month.to_string().replace('-', ""));
            let sentiment = CallSentiment::compute(&call_id, &sentences, Some(&weights), EXTREME_THRESHOLD);
            let firm = &mut firms[t];
            let eps = draw_eps(&mut rng, firm);
            let quarter_end = last_day_before(month);
            let sue = compute_sue(&ticker, quarter_end, &firm.history, eps).sue_raw;
            firm.history.push(eps);
            month_calls.push(SynthCall {
                call_id,
                ticker,
                date,
                timing,
                sentences,
                sentiment,
                returns: Vec::new(),
                sue,
                quarter_end,
                eps,
            });
        }
        calls.extend(month_calls);
    }

    let raw: Vec<f64> = calls.iter().filter_map(|c| c.sue).collect();
    if let Some((lo, hi)) = winsorize_bounds(&raw, 1.0, 99.0) {
        for c in calls.iter_mut() {
            c.sue = c.sue.map(|s| s.clamp(lo, hi));
        }
    }

    for chunk in calls.chunks_mut(cpm) {
        month_returns(&mut rng, cfg, chunk, &corr);
    }

    calls.sort_by(|a, b| (a.date, &a.ticker, &a.call_id).cmp(&(b.date, &b.ticker, &b.call_id)));
    let truth = GroundTruth {
        generator: GENERATOR.to_string(),
        seed: cfg.seed,
        mode: if cfg.linear_mode() { "linear" } else { "copula" }.to_string(),
        ic_schedule: schedule,
        copula_correlation: corr,
        true_weights: weights,
        fm_slopes: cfg.fm_slopes.clone(),
        n_calls: calls.len(),
        config: cfg.clone(),
    };
    Ok(Simulation { calls, warmup, truth })
}

pub(crate) fn to_panel(calls: &[SynthCall]) -> Panel {
    let rows = calls
        .iter()
        .map(|c| {
            let mut row = PanelRow::new(&c.call_id, &c.ticker, c.date, c.timing);
            for m in crate::aggregate::Method::ALL {
                row.signals.insert(m.column().to_string(), c.sentiment.get(m));
            }
            for role in SpeakerRole::GROUPS {
                row.signals.insert(format!("role_{role}"), c.sentiment.role_means.get(role));
            }
            row.signals.insert("sue".to_string(), c.sue);
            for (k, r) in c.returns.iter().enumerate() {
                row.returns.insert(k as u32 + 1, Some(*r));
            }
            row
        })
        .collect();
    Panel::new(rows).expect("synthetic call ids are unique")
}

/// Generate a panel and the record of its generating parameters.
///
/// Columns: `m1`-`m5` (M4 uses the configured true weights), `role_<role>`
/// per-role means, winsorized `sue`, and returns for horizons
/// `1..=max_horizon`.
pub fn generate_panel(cfg: &SynthConfig) -> Result<(Panel, GroundTruth), SynthError> {
    let sim = simulate(cfg)?;
    Ok((to_panel(&sim.calls), sim.truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::{monthly_ic, spearman_pairs};

    #[test]
    fn copula_mapping() {
        assert_eq!(copula_correlation(0.0), 0.0);
        assert!((copula_correlation(1.0) - 1.0).abs() < 1e-15);
        let ic = 0.12;
        let rho = copula_correlation(ic);
        assert!((6.0 / std::f64::consts::PI * (rho / 2.0).asin() - ic).abs() < 1e-15);
    }

    #[test]
    fn sentence_probabilities_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for target in [-0.6, -0.1, 0.0, 0.2, 0.7] {
            for s in role_sentences(&mut rng, SpeakerRole::Cfo, 40, target, 0.5, 0.08, 0.25) {
                let sum = s.p_pos + s.p_neg + s.p_neu;
                assert!((sum - 1.0).abs() < 1e-12);
                assert!([s.p_pos, s.p_neg, s.p_neu].iter().all(|p| (0.0..=1.0).contains(p)));
                match s.stratum {
                    Stratum::Neutral => assert!(s.net().abs() <= 0.5),
                    Stratum::Positive => assert!(s.net() > 0.5),
                    Stratum::Negative => assert!(s.net() < -0.5),
                }
            }
        }
    }

    #[test]
    fn role_mean_tracks_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = role_sentences(&mut rng, SpeakerRole::Executive, 400, 0.3, 0.45, 0.08, 0.25);
        let mean = s.iter().map(|x| x.net()).sum::<f64>() / 400.0;
        assert!((mean - 0.3).abs() < 0.02, "{mean}");
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = SynthConfig::small(5);
        let csv = |c: &SynthConfig| {
            let mut buf = Vec::new();
            generate_panel(c).unwrap().0.write_csv(&mut buf).unwrap();
            buf
        };
        assert_eq!(csv(&cfg), csv(&cfg));
        assert_ne!(csv(&cfg), csv(&SynthConfig::small(6)));
    }

    #[test]
    fn panel_shape() {
        let cfg = SynthConfig::small(1);
        let (panel, truth) = generate_panel(&cfg).unwrap();
        assert_eq!(panel.len(), 24 * 40);
        assert_eq!(truth.n_calls, panel.len());
        assert_eq!(panel.by_month().len(), 24);
        assert!(panel.by_month().values().all(|r| r.len() == 40));
        assert_eq!(panel.horizons().len(), 21);
        let rows = panel.rows();
        assert!(rows.windows(2).all(|w| w[0].event_date <= w[1].event_date));
        assert!(rows.iter().all(|r| r.signal("m4").is_some() && r.signal("sue").is_some()));
        assert!(rows.iter().all(|r| !matches!(r.event_date.weekday(), Weekday::Sat | Weekday::Sun)));
    }

    #[test]
    fn null_target_gives_no_dependence() {
        let cfg = SynthConfig {
            target_ic: 0.0,
            ..SynthConfig::small(11)
        };
        let (panel, _) = generate_panel(&cfg).unwrap();
        let n = panel.len() as f64;
        let r = spearman_pairs(panel.rows().iter().map(|r| (r.signal("m4"), r.ret(1)))).unwrap();
        assert!(r.abs() <= 3.0 / n.sqrt(), "{r}");
    }

    #[test]
    fn near_unit_target_gives_near_perfect_ranks() {
        let cfg = SynthConfig {
            target_ic: 0.999,
            ..SynthConfig::small(2)
        };
        let (panel, _) = generate_panel(&cfg).unwrap();
        let ic = monthly_ic(&panel, "m4", 1, 20).unwrap();
        assert!(ic.mean_ic > 0.98, "{}", ic.mean_ic);
    }

    #[test]
    fn unknown_driver_rejected() {
        let cfg = SynthConfig {
            driver: "nope".into(),
            ..SynthConfig::small(1)
        };
        assert!(matches!(generate_panel(&cfg), Err(SynthError::InvalidConfig(_))));
    }
}
