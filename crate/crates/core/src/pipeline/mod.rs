//! Glue from ingestion files to a call panel, and from a panel to reports.

mod analysis;
mod load;

pub use analysis::{
    car_report, decay_report, double_sort_report, ff5_report, fm_report, ic_report, sorts_report, weights_report,
    AnalysisSettings, Artifact, ReportError,
};
pub use load::{load_inputs, InputPaths, Inputs};

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use thiserror::Error;

use crate::aggregate::{
    agg_section_weighted, aggregate, category_means, text_hash, AggregateError, LmSentence, Method, RoleMeans,
    ScoredSentenceRecord, SectionWeights, WeightError, EXTREME_THRESHOLD,
};
use crate::market::{compute_sue, event_return, winsorize_bounds, EarningsRow, PriceSeries};
use crate::panel::{Panel, PanelError, PanelRow};
use crate::transcript::{SpeakerRole, Transcript};

/// Column prefix of the per-role model means.
pub const ROLE_PREFIX: &str = "role_";
/// Column prefix of the per-role dictionary means.
pub const LM_ROLE_PREFIX: &str = "lm_role_";
pub const LM_PREFIX: &str = "lm_";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input {path}: {message}")]
    Input { path: String, message: String },
    #[error("call {call_id}: {message}")]
    ScoreMismatch { call_id: String, message: String },
    #[error("scores file references call {0}, which has no transcript")]
    UnknownScoredCall(String),
    #[error("call {0} appears in more than one transcript")]
    DuplicateCall(String),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("temporal leak: weights were fitted on data through {fitted}, after the evaluation cutoff {cutoff}")]
    FrozenWeightsLeak { fitted: NaiveDate, cutoff: NaiveDate },
}

/// Knobs for panel construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelOptions {
    pub extreme_threshold: f64,
    /// Lower and upper SUE winsorization percentiles.
    pub winsor: (f64, f64),
    /// Forward returns are computed for horizons `1..=max_horizon`.
    pub max_horizon: u32,
}

impl Default for PanelOptions {
    fn default() -> Self {
        Self {
            extreme_threshold: EXTREME_THRESHOLD,
            winsor: (1.0, 99.0),
            max_horizon: 21,
        }
    }
}

fn score_records<'a>(
    transcripts: &[Transcript],
    records: &'a [ScoredSentenceRecord],
) -> Result<HashMap<&'a str, Vec<&'a ScoredSentenceRecord>>, PipelineError> {
    let known: HashSet<&str> = transcripts.iter().map(|t| t.call_id.as_str()).collect();
    let mut by_call: HashMap<&str, Vec<&ScoredSentenceRecord>> = HashMap::new();
    for r in records {
        if !known.contains(r.call_id.as_str()) {
            return Err(PipelineError::UnknownScoredCall(r.call_id.clone()));
        }
        by_call.entry(r.call_id.as_str()).or_default().push(r);
    }
    Ok(by_call)
}

fn call_signals(
    t: &Transcript,
    scores: &[&ScoredSentenceRecord],
    lexicon: &crate::lexicon::Lexicon,
    threshold: f64,
) -> Result<BTreeMap<String, Option<f64>>, PipelineError> {
    let sentences = t.sentences();
    let mismatch = |message: String| PipelineError::ScoreMismatch {
        call_id: t.call_id.clone(),
        message,
    };
    if sentences.len() != scores.len() {
        return Err(mismatch(format!(
            "{} sentences after segmentation but {} score records",
            sentences.len(),
            scores.len()
        )));
    }
    let mut model = Vec::with_capacity(sentences.len());
    let mut lm = Vec::with_capacity(sentences.len());
    for (i, (s, rec)) in sentences.iter().zip(scores).enumerate() {
        if s.role != rec.role {
            return Err(mismatch(format!("sentence {i} is spoken by {} but scored as {}", s.role, rec.role)));
        }
        if text_hash(&s.text) != rec.text_hash {
            return Err(mismatch(format!("sentence {i} text hash differs from the scores file")));
        }
        model.push(rec.to_score()?);
        lm.push(LmSentence {
            role: s.role,
            score: lexicon.score(&s.text),
        });
    }
    let mut out = BTreeMap::new();
    for m in Method::ALL {
        if m == Method::M4 {
            continue;
        }
        out.insert(m.column().to_string(), aggregate(m, &model, None, threshold));
        out.insert(format!("{LM_PREFIX}{}", m.column()), aggregate(m, &lm, None, threshold));
    }
    let (means, lm_means) = (category_means(&model), category_means(&lm));
    for role in SpeakerRole::GROUPS {
        out.insert(format!("{ROLE_PREFIX}{role}"), means.get(role));
        out.insert(format!("{LM_ROLE_PREFIX}{role}"), lm_means.get(role));
    }
    Ok(out)
}

/// Raw SUE per `(ticker, report_date)`, from each ticker's earlier quarters.
fn sue_by_report(earnings: &[EarningsRow]) -> HashMap<(&str, NaiveDate), Option<f64>> {
    let mut out = HashMap::new();
    let mut start = 0;
    while start < earnings.len() {
        let ticker = &earnings[start].ticker;
        let end = start + earnings[start..].iter().take_while(|e| &e.ticker == ticker).count();
        let rows = &earnings[start..end];
        for (i, e) in rows.iter().enumerate() {
            let history: Vec<(f64, f64)> = rows[..i].iter().map(|p| (p.eps_actual, p.eps_estimate)).collect();
            let rec = compute_sue(ticker, e.fiscal_quarter_end, &history, (e.eps_actual, e.eps_estimate));
            out.insert((ticker.as_str(), e.report_date), rec.sue_raw);
        }
        start = end;
    }
    out
}

/// Build the call panel from parsed inputs.
///
/// Sentences and score records are joined per call in document order; the
/// role and text hash must agree at every position. Columns: `m1`, `m2`,
/// `m3`, `m5`, `role_<role>`, their `lm_` counterparts, pooled-winsorized
/// `sue`, and forward returns. `m4` needs frozen weights; see
/// [`apply_weights`]. Rows are sorted by `(event_date, ticker, call_id)`.
pub fn build_panel(inputs: &Inputs, opts: &PanelOptions) -> Result<Panel, PipelineError> {
    let mut seen = HashSet::new();
    for t in &inputs.transcripts {
        if !seen.insert(t.call_id.as_str()) {
            return Err(PipelineError::DuplicateCall(t.call_id.clone()));
        }
    }
    let by_call = score_records(&inputs.transcripts, &inputs.scores.records)?;
    let sue = sue_by_report(&inputs.earnings);
    let empty = Vec::new();
    let mut rows = inputs
        .transcripts
        .par_iter()
        .map(|t| {
            let scores = by_call.get(t.call_id.as_str()).unwrap_or(&empty);
            let signals = call_signals(t, scores, &inputs.lexicon, opts.extreme_threshold)?;
            let date = t.call_date();
            let mut row = PanelRow::new(&t.call_id, &t.ticker, date, t.timing);
            row.signals = signals;
            row.signals
                .insert("sue".to_string(), sue.get(&(t.ticker.as_str(), date)).copied().flatten());
            let prices: Option<&PriceSeries> = inputs.prices.get(&t.ticker);
            for h in 1..=opts.max_horizon {
                row.returns
                    .insert(h, prices.and_then(|p| event_return(p, date, t.timing, h).ok()));
            }
            Ok(row)
        })
        .collect::<Vec<Result<PanelRow, PipelineError>>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let raw: Vec<f64> = rows.iter().filter_map(|r| r.signal("sue")).collect();
    if let Some((lo, hi)) = winsorize_bounds(&raw, opts.winsor.0, opts.winsor.1) {
        for r in rows.iter_mut() {
            if let Some(Some(v)) = r.signals.get_mut("sue") {
                *v = v.clamp(lo, hi);
            }
        }
    }
    rows.sort_by(|a, b| (a.event_date, &a.ticker, &a.call_id).cmp(&(b.event_date, &b.ticker, &b.call_id)));
    Ok(Panel::new(rows)?)
}

/// Add `column` as the section-weighted mean of the `<prefix><role>`
/// columns named by the weights.
pub fn apply_weights(panel: &Panel, weights: &SectionWeights, column: &str) -> Panel {
    let mut out = panel.clone();
    for r in out.rows_mut() {
        let means = RoleMeans(SpeakerRole::GROUPS.map(|g| r.signal(&format!("{}{g}", weights.signal_prefix()))));
        let v = agg_section_weighted(&means, weights.weights());
        r.signals.insert(column.to_string(), v);
    }
    out
}

/// Fit section weights on the rows dated before `cutoff`.
///
/// Rows on or after the cutoff are dropped before fitting, so the result
/// depends only on the training rows.
pub fn fit_weights(panel: &Panel, prefix: &str, horizon: u32, cutoff: NaiveDate) -> Result<SectionWeights, PipelineError> {
    Ok(crate::aggregate::fit_ic_weights(&panel.before(cutoff), prefix, horizon, cutoff)?)
}

/// Reject weights fitted on data reaching past the evaluation cutoff.
pub fn check_frozen(weights: &SectionWeights, cutoff: NaiveDate) -> Result<(), PipelineError> {
    if weights.training_cutoff() > cutoff {
        return Err(PipelineError::FrozenWeightsLeak {
            fitted: weights.training_cutoff(),
            cutoff,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{write_ingestion_files, SynthConfig};

    fn synth_inputs(dir: &std::path::Path) -> (Inputs, crate::synth::SynthFiles) {
        let cfg = SynthConfig {
            max_horizon: 5,
            ..SynthConfig::small(11)
        };
        let files = write_ingestion_files(&cfg, dir).unwrap();
        let paths = InputPaths {
            transcripts: files.transcripts.clone(),
            scores: files.scores.clone(),
            prices: files.prices.clone(),
            earnings: files.earnings.clone(),
            factors: files.factors.clone(),
            lexicon: None,
        };
        (load_inputs(&paths).unwrap(), files)
    }

    #[test]
    fn reproduces_the_synthetic_panel() {
        let dir = tempfile::tempdir().unwrap();
        let (inputs, files) = synth_inputs(dir.path());
        let opts = PanelOptions {
            max_horizon: 5,
            ..PanelOptions::default()
        };
        let panel = build_panel(&inputs, &opts).unwrap();
        let w = SectionWeights::from_ics(
            files.truth.true_weights.map(Some),
            [1; 4],
            NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
        )
        .unwrap();
        let panel = apply_weights(&panel, &w, "m4");
        assert_eq!(panel.len(), files.panel.len());
        for (a, b) in panel.rows().iter().zip(files.panel.rows()) {
            assert_eq!((&a.call_id, a.event_date, a.timing), (&b.call_id, b.event_date, b.timing));
            for name in b.signals.keys() {
                match (a.signal(name), b.signal(name)) {
                    (Some(x), Some(y)) => assert!((x - y).abs() < 1e-9, "{} {name}: {x} vs {y}", a.call_id),
                    (x, y) => assert_eq!(x, y, "{} {name}", a.call_id),
                }
            }
            for h in 1..=5 {
                let (x, y) = (a.ret(h).unwrap(), b.ret(h).unwrap());
                assert!((x - y).abs() < 1e-9);
            }
            assert!(a.signal("lm_m1").is_some());
        }
    }

    #[test]
    fn misaligned_scores_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (mut inputs, _) = synth_inputs(dir.path());
        inputs.scores.records.swap(0, 1);
        let err = build_panel(&inputs, &PanelOptions::default()).unwrap_err();
        assert!(matches!(err, PipelineError::ScoreMismatch { .. }), "{err}");

        let (mut inputs, _) = synth_inputs(dir.path());
        inputs.scores.records[0].call_id = "nope".into();
        assert!(matches!(
            build_panel(&inputs, &PanelOptions::default()),
            Err(PipelineError::UnknownScoredCall(_))
        ));

        let (mut inputs, _) = synth_inputs(dir.path());
        inputs.scores.records.pop();
        assert!(matches!(
            build_panel(&inputs, &PanelOptions::default()),
            Err(PipelineError::ScoreMismatch { .. })
        ));
    }

    #[test]
    fn fit_ignores_rows_after_cutoff() {
        let dir = tempfile::tempdir().unwrap();
        let (inputs, _) = synth_inputs(dir.path());
        let panel = build_panel(&inputs, &PanelOptions::default()).unwrap();
        let cutoff = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
        let a = fit_weights(&panel, ROLE_PREFIX, 1, cutoff).unwrap();
        let b = fit_weights(&panel.before(cutoff), ROLE_PREFIX, 1, cutoff).unwrap();
        assert_eq!(a.to_toml(), b.to_toml());
        assert!(check_frozen(&a, cutoff).is_ok());
        assert!(check_frozen(&a, NaiveDate::from_ymd_opt(2021, 6, 1).unwrap()).is_err());
    }
}
