use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::LM_PREFIX;
use crate::aggregate::{Method, SectionWeights};
use crate::econ::report::{
    car_table, decay_table, double_sort_table, ff5_table, fm_table, ic_table, num, sort_table, stars, weights_table,
    TextTable,
};
use crate::econ::{
    car_profile, decay_profile, double_sort, fama_macbeth, ff5_alpha, monthly_ic, monthly_portfolios, quintile_sort,
    EconError, Ff5Result, GroupBy, IcSeries, ReturnBasis,
};
use crate::market::{FactorMonth, PriceSeries};
use crate::panel::{Panel, YearMonth};
use crate::transcript::SpeakerRole;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error("benchmark {0} has no price series")]
    MissingBenchmark(String),
}

/// Parameters shared by the report stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub training_cutoff: NaiveDate,
    pub min_monthly_obs: usize,
    /// Return horizons for the IC tables; the first drives every other test.
    pub horizons: Vec<u32>,
    pub decay_horizons: Vec<u32>,
    pub car_days: usize,
    pub signal: String,
    /// Earnings-surprise control for the regressions and double sort.
    pub control: String,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            training_cutoff: NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
            min_monthly_obs: crate::econ::MIN_MONTHLY_OBS,
            horizons: vec![1, 5],
            decay_horizons: (1..=21).collect(),
            car_days: 30,
            signal: "m4".to_string(),
            control: "sue".to_string(),
        }
    }
}

impl AnalysisSettings {
    fn horizon(&self) -> u32 {
        self.horizons.first().copied().unwrap_or(1)
    }

    fn lm_signal(&self) -> String {
        format!("{LM_PREFIX}{}", self.signal)
    }
}

/// A rendered report: aligned text plus the structured results behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub text: String,
    pub json: Value,
}

impl Artifact {
    fn new(name: &str, tables: &[TextTable], json: Value) -> Self {
        Self {
            name: name.to_string(),
            text: tables.iter().map(TextTable::render).collect::<Vec<_>>().join("\n"),
            json,
        }
    }

    /// Write `<name>.txt` and `<name>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::write(dir.join(format!("{}.txt", self.name)), &self.text)?;
        let mut json = serde_json::to_string_pretty(&self.json).expect("report values serialize");
        json.push('\n');
        std::fs::write(dir.join(format!("{}.json", self.name)), json)
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn label(column: &str) -> String {
    Method::ALL
        .iter()
        .find(|m| m.column() == column)
        .map_or_else(|| column.to_string(), |m| m.label().to_string())
}

fn lm_column(m: Method) -> String {
    format!("{LM_PREFIX}{}", m.column())
}

fn split(panel: &Panel, cutoff: NaiveDate) -> [(&'static str, Panel); 3] {
    [("full", panel.clone()), ("train", panel.before(cutoff)), ("test", panel.from_date(cutoff))]
}

/// Fails when a non-empty panel has no row carrying one of `columns`.
fn require(panel: &Panel, columns: &[&str]) -> Result<(), ReportError> {
    for c in columns {
        if !panel.is_empty() && panel.rows().iter().all(|r| r.signal(c).is_none()) {
            return Err(EconError::UnknownSignal(c.to_string()).into());
        }
    }
    Ok(())
}

fn weights_json(w: &SectionWeights) -> Value {
    let roles: BTreeMap<&str, Value> = SpeakerRole::GROUPS
        .iter()
        .enumerate()
        .map(|(i, g)| {
            (
                g.as_str(),
                json!({ "weight": w.weights()[i], "ic": w.ic()[i], "p_value": w.p_values()[i], "n": w.n()[i] }),
            )
        })
        .collect();
    json!({
        "training_cutoff": w.training_cutoff().to_string(),
        "horizon": w.horizon(),
        "signal_prefix": w.signal_prefix(),
        "roles": roles,
    })
}

/// Role ICs and frozen weights for the model and dictionary scores.
pub fn weights_report(model: &SectionWeights, lm: Option<&SectionWeights>) -> Artifact {
    let mut tables = vec![weights_table("Section weights from training-period ICs", model)];
    let mut json = json!({ "model": weights_json(model) });
    if let Some(lm) = lm {
        tables.push(weights_table("Section weights, dictionary tone", lm));
        json["dictionary"] = weights_json(lm);
    }
    Artifact::new("weights", &tables, json)
}

/// Monthly rank ICs: every aggregate by horizon, train versus test, and the
/// model against the dictionary.
pub fn ic_report(panel: &Panel, s: &AnalysisSettings) -> Result<Artifact, ReportError> {
    require(panel, &[&s.signal])?;
    let h0 = s.horizon();
    monthly_ic(panel, &s.signal, h0, s.min_monthly_obs)?;
    let ic = |p: &Panel, col: &str, h: u32| monthly_ic(p, col, h, s.min_monthly_obs).ok();
    let mut tables = Vec::new();
    let mut json = serde_json::Map::new();

    for &h in &s.horizons {
        let series: Vec<(String, IcSeries)> = Method::ALL
            .iter()
            .filter_map(|m| ic(panel, m.column(), h).map(|r| (m.label().to_string(), r)))
            .collect();
        let refs: Vec<(&str, &IcSeries)> = series.iter().map(|(l, r)| (l.as_str(), r)).collect();
        tables.push(ic_table(&format!("Monthly IC by aggregation method, {h}-day return"), &refs));
        json.insert(format!("by_method_h{h}"), to_json(&series.iter().map(|(_, r)| r).collect::<Vec<_>>()));
    }

    let [_, (_, train), (_, test)] = split(panel, s.training_cutoff);
    let mut oos = TextTable::new(
        format!("Out-of-sample IC, {h0}-day return (cutoff {})", s.training_cutoff),
        &["Method", "Train IC", "N", "Test IC", "N", "Decay"],
    );
    let mut oos_json = Vec::new();
    for m in Method::ALL {
        let (a, b) = (ic(&train, m.column(), h0), ic(&test, m.column(), h0));
        let cell = |r: &Option<IcSeries>| match r {
            Some(r) => (format!("{}{}", num(r.mean_ic, 3), stars(r.p_value)), r.n_obs.to_string()),
            None => ("n/a".to_string(), "0".to_string()),
        };
        let ((ta, na), (tb, nb)) = (cell(&a), cell(&b));
        let decay = match (&a, &b) {
            (Some(a), Some(b)) if a.mean_ic != 0.0 => Some((a.mean_ic - b.mean_ic) / a.mean_ic.abs()),
            _ => None,
        };
        oos.row(vec![m.label().to_string(), ta, na, tb, nb, decay.map_or("n/a".into(), |d| num(d, 3))]);
        oos_json.push(json!({ "method": m.column(), "train": a, "test": b, "decay": decay }));
    }
    oos.note("Decay = (train IC - test IC) / |train IC|; negative values mean the signal strengthened.");
    tables.push(oos);
    json.insert("out_of_sample".into(), Value::Array(oos_json));

    let mut race = TextTable::new(format!("Model versus dictionary IC, {h0}-day return"), &["Method", "Model IC", "Dictionary IC", "Ratio"]);
    let mut race_json = Vec::new();
    for m in Method::ALL {
        let (a, b) = (ic(panel, m.column(), h0), ic(panel, &lm_column(m), h0));
        let fmt = |r: &Option<IcSeries>| r.as_ref().map_or("n/a".to_string(), |r| format!("{}{}", num(r.mean_ic, 3), stars(r.p_value)));
        let ratio = match (&a, &b) {
            (Some(a), Some(b)) if b.mean_ic != 0.0 => Some(a.mean_ic / b.mean_ic),
            _ => None,
        };
        race.row(vec![m.label().to_string(), fmt(&a), fmt(&b), ratio.map_or("n/a".into(), |r| format!("{}x", num(r, 2)))]);
        race_json.push(json!({ "method": m.column(), "model": a.map(|r| r.mean_ic), "dictionary": b.map(|r| r.mean_ic) }));
    }
    tables.push(race);
    json.insert("model_vs_dictionary".into(), Value::Array(race_json));
    Ok(Artifact::new("ic", &tables, Value::Object(json)))
}

/// Fama-MacBeth regressions: the signal alone, the control alone, both,
/// and the dictionary horse race.
pub fn fm_report(panel: &Panel, s: &AnalysisSettings) -> Result<Artifact, ReportError> {
    require(panel, &[&s.signal])?;
    let h = s.horizon();
    let lm = s.lm_signal();
    let specs: [(&str, Vec<&str>); 5] = [
        ("(1)", vec![&s.signal]),
        ("(2)", vec![&s.control]),
        ("(3)", vec![&s.signal, &s.control]),
        ("(4)", vec![&lm]),
        ("(5)", vec![&s.signal, &lm]),
    ];
    let first = fama_macbeth(panel, &specs[0].1, h)?;
    let mut models = vec![(specs[0].0, first)];
    for (name, regs) in &specs[1..] {
        if let Ok(r) = fama_macbeth(panel, regs, h) {
            models.push((name, r));
        }
    }
    let refs: Vec<(&str, &_)> = models.iter().map(|(n, r)| (*n, r)).collect();
    let mut t = fm_table(&format!("Fama-MacBeth regressions, {h}-day return"), &refs);
    for (name, regs) in &specs {
        t.note(format!("{name}: {}", regs.join(" + ")));
    }
    let json: BTreeMap<&str, Value> = models.iter().map(|(n, r)| (*n, to_json(r))).collect();
    Ok(Artifact::new("fm", &[t], to_json(&json)))
}

fn leg(ports: &[crate::econ::MonthlyPortfolio], f: impl Fn(&crate::econ::MonthlyPortfolio) -> f64) -> Vec<(YearMonth, f64)> {
    ports.iter().map(|p| (p.month, f(p))).collect()
}

/// Five-factor alphas of the monthly long-short portfolio and its legs,
/// over the full sample and each side of the cutoff.
pub fn ff5_report(panel: &Panel, factors: &[FactorMonth], s: &AnalysisSettings) -> Result<Artifact, ReportError> {
    require(panel, &[&s.signal])?;
    let h = s.horizon();
    let mut results: Vec<(String, Ff5Result)> = Vec::new();
    for (period, p) in split(panel, s.training_cutoff) {
        let ports = monthly_portfolios(&p, &s.signal, h);
        let ls = ff5_alpha(&leg(&ports, |m| m.long_short), factors, ReturnBasis::Excess);
        let ls = match (period, ls) {
            ("full", r) => r?,
            (_, Ok(r)) => r,
            (_, Err(_)) => continue,
        };
        results.push((format!("Q5-Q1 ({period})"), ls));
        if period == "full" {
            for (name, k) in [("Q5", 4), ("Q1", 0)] {
                if let Ok(r) = ff5_alpha(&leg(&ports, |m| m.bucket_returns[k]), factors, ReturnBasis::Total) {
                    results.push((format!("{name} ({period})"), r));
                }
            }
        }
    }
    let refs: Vec<(&str, &Ff5Result)> = results.iter().map(|(n, r)| (n.as_str(), r)).collect();
    let t = ff5_table(&format!("Five-factor alphas, {} quintile portfolios", label(&s.signal)), &refs);
    let json: BTreeMap<&str, Value> = results.iter().map(|(n, r)| (n.as_str(), to_json(r))).collect();
    Ok(Artifact::new("ff5", &[t], to_json(&json)))
}

/// Pooled quintile sorts for every aggregate, plus the signal's test period.
pub fn sorts_report(panel: &Panel, s: &AnalysisSettings) -> Result<Artifact, ReportError> {
    require(panel, &[&s.signal])?;
    let h = s.horizon();
    let main = quintile_sort(panel, &s.signal, h, GroupBy::Pooled)?;
    let mut tables = vec![sort_table(&format!("Quintile sort on {}, full sample", label(&s.signal)), &main)];
    let mut json = serde_json::Map::new();
    if let Ok(r) = quintile_sort(&panel.from_date(s.training_cutoff), &s.signal, h, GroupBy::Pooled) {
        tables.push(sort_table(&format!("Quintile sort on {}, from {}", label(&s.signal), s.training_cutoff), &r));
        json.insert("test".into(), to_json(&r));
    }
    json.insert("full".into(), to_json(&main));
    let mut summary = TextTable::new(
        format!("Quintile spreads by method, {h}-day return (%)"),
        &["Method", "Q1", "Q5", "Q5-Q1", "t-stat", "Mono"],
    );
    let mut by_method = Vec::new();
    for col in Method::ALL.iter().map(|m| m.column().to_string()).chain(Method::ALL.iter().map(|m| lm_column(*m))) {
        let Ok(r) = quintile_sort(panel, &col, h, GroupBy::Pooled) else { continue };
        let q = |i: usize| num(100.0 * r.buckets[i].mean_return, 3);
        let name = col.strip_prefix(LM_PREFIX).map_or_else(|| label(&col), |c| format!("{} (dictionary)", label(c)));
        summary.row(vec![
            name,
            q(0),
            q(r.buckets.len() - 1),
            format!("{}{}", num(100.0 * r.spread, 3), stars(r.spread_p)),
            num(r.spread_t, 2),
            if r.monotone { "yes" } else { "no" }.to_string(),
        ]);
        by_method.push(to_json(&r));
    }
    tables.push(summary);
    json.insert("by_method".into(), Value::Array(by_method));
    Ok(Artifact::new("sorts", &tables, Value::Object(json)))
}

/// Signal quintiles within terciles of the control.
pub fn double_sort_report(panel: &Panel, s: &AnalysisSettings) -> Result<Artifact, ReportError> {
    require(panel, &[&s.control, &s.signal])?;
    let d = double_sort(panel, &s.control, &s.signal, s.horizon())?;
    let t = double_sort_table(&format!("Double sort: {} quintiles within {} terciles", label(&s.signal), s.control), &d);
    Ok(Artifact::new("doublesort", &[t], to_json(&d)))
}

/// Cumulative abnormal returns against the benchmark by signal quintile.
pub fn car_report(
    panel: &Panel,
    prices: &BTreeMap<String, PriceSeries>,
    benchmark: &str,
    s: &AnalysisSettings,
) -> Result<Artifact, ReportError> {
    let bench = prices.get(benchmark).ok_or_else(|| ReportError::MissingBenchmark(benchmark.to_string()))?;
    require(panel, &[&s.signal])?;
    let c = car_profile(panel, &s.signal, prices, bench, s.car_days)?;
    let mut days: Vec<usize> = [0, 1, 2, 5, 10, 20].into_iter().filter(|d| *d < s.car_days).collect();
    if !days.contains(&(s.car_days - 1)) {
        days.push(s.car_days - 1);
    }
    let t = car_table(&format!("Cumulative abnormal returns (%) against {benchmark} by {} quintile", label(&s.signal)), &c, &days);
    Ok(Artifact::new("car", &[t], to_json(&c)))
}

/// IC of the signal across return horizons.
pub fn decay_report(panel: &Panel, s: &AnalysisSettings) -> Result<Artifact, ReportError> {
    require(panel, &[&s.signal])?;
    let d = decay_profile(panel, &s.signal, &s.decay_horizons, s.min_monthly_obs)?;
    let t = decay_table(&format!("IC decay of {}", label(&s.signal)), &d);
    Ok(Artifact::new("decay", &[t], to_json(&d)))
}
