//! Plain-text tables for the test results.

use std::fmt::Write as _;

use super::{CarProfile, DecayProfile, DoubleSortResult, Ff5Result, FmResult, IcSeries, SortResult};
use crate::aggregate::SectionWeights;
use crate::transcript::SpeakerRole;

/// Column-aligned table: first column left-aligned, the rest right-aligned.
#[derive(Debug, Clone, Default)]
pub struct TextTable {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl TextTable {
    pub fn new(title: impl Into<String>, headers: &[&str]) -> Self {
        Self {
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        assert_eq!(cells.len(), self.headers.len(), "row width differs from header");
        self.rows.push(cells);
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn render(&self) -> String {
        let ncol = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (j, (c, w)) in cells.iter().zip(&widths).enumerate() {
                if j > 0 {
                    s.push_str("  ");
                }
                if j == 0 {
                    let _ = write!(s, "{c:<w$}");
                } else {
                    let _ = write!(s, "{c:>w$}");
                }
            }
            s.trim_end().to_string()
        };
        let total = widths.iter().sum::<usize>() + 2 * ncol.saturating_sub(1);
        let rule = "-".repeat(total);
        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&self.title);
            out.push('\n');
        }
        out.push_str(&rule);
        out.push('\n');
        out.push_str(&line(&self.headers));
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out.push_str(&rule);
        out.push('\n');
        for n in &self.notes {
            out.push_str(n);
            out.push('\n');
        }
        out
    }
}

pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// Fixed decimals; NaN and infinities spelled out.
pub fn num(x: f64, decimals: usize) -> String {
    if x.is_nan() {
        "n/a".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        let s = format!("{x:.decimals$}");
        // avoid "-0.000"
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }
}

pub fn pval(p: f64) -> String {
    if p.is_nan() {
        "n/a".to_string()
    } else if p < 1e-3 {
        format!("{p:.2e}")
    } else {
        format!("{p:.3}")
    }
}

pub fn pct(x: f64, decimals: usize) -> String {
    num(100.0 * x, decimals)
}

fn with_stars(x: f64, decimals: usize, p: f64) -> String {
    format!("{}{}", num(x, decimals), stars(p))
}

/// Mean IC per signal with NW t-statistics.
pub fn ic_table(title: &str, series: &[(&str, &IcSeries)]) -> TextTable {
    let mut t = TextTable::new(title, &["Measure", "Mean IC", "t-stat (NW)", "p-value", "Months", "N"]);
    for (label, s) in series {
        t.row(vec![
            label.to_string(),
            with_stars(s.mean_ic, 3, s.p_value),
            num(s.t_nw, 2),
            pval(s.p_value),
            s.n_months().to_string(),
            s.n_obs.to_string(),
        ]);
    }
    if let Some((_, s)) = series.first() {
        t.note(format!("Newey-West lag {}; months need at least the configured minimum of calls.", s.lag));
    }
    t
}

/// One column per model, coefficient over t-statistic.
pub fn fm_table(title: &str, models: &[(&str, &FmResult)]) -> TextTable {
    let mut headers = vec!["Variable"];
    headers.extend(models.iter().map(|(l, _)| *l));
    let mut t = TextTable::new(title, &headers);
    let mut names: Vec<String> = Vec::new();
    for (_, m) in models {
        for c in &m.slopes {
            if !names.contains(&c.name) {
                names.push(c.name.clone());
            }
        }
    }
    names.push("intercept".to_string());
    for name in &names {
        let mut est = vec![name.clone()];
        let mut tst = vec![String::new()];
        for (_, m) in models {
            let c = if name == "intercept" { Some(&m.intercept) } else { m.slope(name) };
            match c {
                Some(c) => {
                    est.push(with_stars(c.gamma_bar, 4, c.p_value));
                    tst.push(format!("({})", num(c.t_nw, 2)));
                }
                None => {
                    est.push(String::new());
                    tst.push(String::new());
                }
            }
        }
        t.row(est);
        t.row(tst);
    }
    let mut months = vec!["Months".to_string()];
    let mut obs = vec!["Observations".to_string()];
    let mut r2 = vec!["Avg. R2".to_string()];
    for (_, m) in models {
        months.push(m.n_months.to_string());
        obs.push(m.n_obs.to_string());
        r2.push(num(m.avg_r_squared, 3));
    }
    t.row(months).row(obs).row(r2);
    t.note("Regressors standardized within month; Newey-West t-statistics in parentheses.");
    t
}

/// Per-bucket statistics plus the top-minus-bottom spread.
pub fn sort_table(title: &str, s: &SortResult) -> TextTable {
    let mut t = TextTable::new(title, &["Quintile", "N", "Mean signal", "Mean ret (%)", "Std (%)", "t-stat"]);
    let q = s.buckets.len();
    for b in &s.buckets {
        let label = match b.bucket {
            1 => "Q1 (Low)".to_string(),
            k if k == q => format!("Q{k} (High)"),
            k => format!("Q{k}"),
        };
        t.row(vec![
            label,
            b.n.to_string(),
            num(b.mean_signal, 3),
            pct(b.mean_return, 3),
            pct(b.sd_return, 3),
            num(b.t_stat, 2),
        ]);
    }
    t.row(vec![
        format!("Q{q} - Q1"),
        String::new(),
        String::new(),
        with_stars(100.0 * s.spread, 3, s.spread_p),
        String::new(),
        num(s.spread_t, 2),
    ]);
    t.note(format!(
        "Signal {}, {}-day returns, {} sort. Monotone: {}. Spread t from the unequal-variance two-sample test.",
        s.signal,
        s.horizon,
        match s.group_by {
            super::GroupBy::Pooled => "pooled",
            super::GroupBy::Monthly => "monthly",
        },
        if s.monotone { "yes" } else { "no" }
    ));
    t
}

pub fn double_sort_table(title: &str, d: &DoubleSortResult) -> TextTable {
    let mut t = TextTable::new(
        title,
        &["Tercile", "N", "Q1", "Q2", "Q3", "Q4", "Q5", "Q5-Q1", "t-stat"],
    );
    for tc in &d.terciles {
        let label = match tc.tercile {
            1 => "Low",
            2 => "Mid",
            _ => "High",
        };
        let mut row = vec![format!("{label} {}", d.outer.to_uppercase()), tc.n.to_string()];
        row.extend(tc.sort.buckets.iter().map(|b| pct(b.mean_return, 3)));
        row.push(with_stars(100.0 * tc.sort.spread, 3, tc.sort.spread_p));
        row.push(num(tc.sort.spread_t, 2));
        t.row(row);
    }
    t.note(format!("Returns in percent; quintiles on {} within each {} tercile.", d.inner, d.outer));
    t
}

pub fn ff5_table(title: &str, models: &[(&str, &Ff5Result)]) -> TextTable {
    let mut t = TextTable::new(
        title,
        &["Portfolio", "Alpha (%)", "t(alpha)", "MktRF", "SMB", "HML", "RMW", "CMA", "R2", "Months"],
    );
    for (label, r) in models {
        let mut row = vec![
            label.to_string(),
            with_stars(100.0 * r.alpha.estimate, 3, r.alpha.p_value),
            num(r.alpha.t_nw, 2),
        ];
        row.extend(r.loadings.iter().map(|c| with_stars(c.estimate, 3, c.p_value)));
        row.push(num(r.r_squared, 3));
        row.push(r.n_months.to_string());
        t.row(row);
    }
    if let Some((_, r)) = models.first() {
        t.note(format!("Newey-West standard errors with {} lags.", r.lag));
    }
    t
}

pub fn car_table(title: &str, c: &CarProfile, days: &[usize]) -> TextTable {
    let mut headers: Vec<String> = vec!["Quintile".into(), "N".into()];
    headers.extend(days.iter().map(|d| format!("Day {d}")));
    let refs: Vec<&str> = headers.iter().map(|s| s.as_str()).collect();
    let mut t = TextTable::new(title, &refs);
    let cell = |path: &[f64], d: usize| path.get(d).map_or(String::new(), |v| pct(*v, 2));
    for q in &c.quintiles {
        let mut row = vec![format!("Q{}", q.quintile), q.n_events.to_string()];
        row.extend(days.iter().map(|d| cell(&q.path, *d)));
        t.row(row);
    }
    let mut row = vec!["Q5 - Q1".to_string(), String::new()];
    row.extend(days.iter().map(|d| cell(&c.spread_path, *d)));
    t.row(row);
    t.note(format!(
        "Cumulative abnormal return vs benchmark in percent, summed daily; {} events excluded.",
        c.excluded.len()
    ));
    t
}

pub fn decay_table(title: &str, d: &DecayProfile) -> TextTable {
    let mut t = TextTable::new(title, &["Horizon (days)", "Mean IC", "t-stat (NW)", "Months"]);
    for p in &d.points {
        t.row(vec![
            p.horizon.to_string(),
            with_stars(p.mean_ic, 3, p.p_value),
            num(p.t_nw, 2),
            p.n_months.to_string(),
        ]);
    }
    t.note(match d.half_life {
        Some(h) => format!("IC first falls below half its initial value at {h} days."),
        None => "IC never falls below half its initial value.".to_string(),
    });
    t
}

pub fn weights_table(title: &str, w: &SectionWeights) -> TextTable {
    let mut t = TextTable::new(title, &["Role", "IC", "p-value", "N", "IC wt. (%)"]);
    for (i, role) in SpeakerRole::GROUPS.iter().enumerate() {
        t.row(vec![
            role.label().to_string(),
            w.ic()[i].map_or("n/a".to_string(), |v| num(v, 3)),
            w.p_values()[i].map_or("n/a".to_string(), pval),
            w.n()[i].to_string(),
            num(100.0 * w.weights()[i], 1),
        ]);
    }
    let ic_sum: f64 = w.ic().iter().flatten().filter(|v| **v > 0.0).sum();
    t.row(vec!["Sum".into(), num(ic_sum, 3), String::new(), String::new(), "100.0".into()]);
    t.note(format!(
        "Fit on calls before {} against {}-day returns; non-positive ICs get zero weight.",
        w.training_cutoff(),
        w.horizon()
    ));
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alignment() {
        let mut t = TextTable::new("T", &["Name", "Value"]);
        t.row(vec!["a".into(), "1.5".into()]).row(vec!["longer".into(), "10.25".into()]);
        let s = t.render();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[2], "Name    Value");
        assert_eq!(lines[4], "a         1.5");
        assert_eq!(lines[5], "longer  10.25");
    }

    #[test]
    fn formatting() {
        assert_eq!(num(-0.0001, 3), "0.000");
        assert_eq!(num(f64::NAN, 2), "n/a");
        assert_eq!(stars(0.001), "***");
        assert_eq!(stars(0.2), "");
        assert_eq!(pval(8.05e-20), "8.05e-20");
        assert_eq!(pct(0.02263, 3), "2.263");
    }
}
