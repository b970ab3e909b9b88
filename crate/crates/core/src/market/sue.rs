use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub const MIN_SUE_HISTORY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SueMissing {
    InsufficientHistory,
    DegenerateVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SueRecord {
    pub ticker: String,
    pub fiscal_quarter: NaiveDate,
    pub surprise: f64,
    pub sigma: Option<f64>,
    pub sue_raw: Option<f64>,
    /// Filled in by the pooled winsorization pass.
    pub sue_winsorized: Option<f64>,
    pub n_history: usize,
    pub missing: Option<SueMissing>,
}

/// Standardized surprise against the expanding window of prior surprises.
///
/// `history` and `current` are `(actual, estimate)` pairs; history must be
/// chronological and strictly earlier than the current quarter.
pub fn compute_sue(
    ticker: &str,
    fiscal_quarter: NaiveDate,
    history: &[(f64, f64)],
    current: (f64, f64),
) -> SueRecord {
    let surprise = current.0 - current.1;
    let prior: Vec<f64> = history.iter().map(|(a, e)| a - e).collect();
    let n = prior.len();
    let mut rec = SueRecord {
        ticker: ticker.to_string(),
        fiscal_quarter,
        surprise,
        sigma: None,
        sue_raw: None,
        sue_winsorized: None,
        n_history: n,
        missing: None,
    };
    if n < MIN_SUE_HISTORY {
        rec.missing = Some(SueMissing::InsufficientHistory);
        return rec;
    }
    let mean = prior.iter().sum::<f64>() / n as f64;
    let sigma = (prior.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let scale = prior.iter().fold(0.0f64, |a, s| a.max(s.abs()));
    if !(sigma > 1e-12 * scale) {
        rec.missing = Some(SueMissing::DegenerateVariance);
        return rec;
    }
    rec.sigma = Some(sigma);
    rec.sue_raw = Some(surprise / sigma);
    rec
}

/// Percentile `p` (0-100) of sorted data, linear interpolation at
/// `h = (n − 1)·p/100`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let h = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// `(P_lower, P_upper)` of the finite values.
pub fn winsorize_bounds(values: &[f64], lower_pct: f64, upper_pct: f64) -> Option<(f64, f64)> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return None;
    }
    sorted.sort_by(f64::total_cmp);
    Some((percentile(&sorted, lower_pct), percentile(&sorted, upper_pct)))
}

pub fn clip(values: &[f64], bounds: (f64, f64)) -> Vec<f64> {
    values.iter().map(|v| v.clamp(bounds.0, bounds.1)).collect()
}

/// Clip to the data's own lower/upper percentiles. Order and length are kept.
pub fn winsorize(values: &[f64], lower_pct: f64, upper_pct: f64) -> Vec<f64> {
    match winsorize_bounds(values, lower_pct, upper_pct) {
        Some(b) => clip(values, b),
        None => values.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> NaiveDate {
        NaiveDate::from_ymd_opt(2022, 3, 31).unwrap()
    }

    #[test]
    fn sue_examples() {
        let h = [(0.1, 0.0), (0.0, 0.1), (0.1, 0.0), (0.0, 0.1)];
        let r = compute_sue("X", q(), &h, (0.6, 0.5));
        assert!((r.sigma.unwrap() - 0.115_470_053_837_925_15).abs() < 1e-12);
        assert!((r.sue_raw.unwrap() - 0.866_025_403_784_438_6).abs() < 1e-9);
        assert_eq!(r.missing, None);

        let r = compute_sue("X", q(), &h[..3], (0.6, 0.5));
        assert_eq!(r.missing, Some(SueMissing::InsufficientHistory));
        assert_eq!(r.sue_raw, None);

        let same = [(0.3, 0.2); 5];
        let r = compute_sue("X", q(), &same, (0.6, 0.5));
        assert_eq!(r.missing, Some(SueMissing::DegenerateVariance));
    }

    #[test]
    fn percentile_matches_linear_rule() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((percentile(&v, 1.0) - 1.99).abs() < 1e-12);
        assert!((percentile(&v, 99.0) - 99.01).abs() < 1e-12);
        assert_eq!(percentile(&[5.0], 1.0), 5.0);
    }

    #[test]
    fn winsorize_examples() {
        let v: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        let w = winsorize(&v, 1.0, 99.0);
        assert!((w[0] - 99.01).abs() < 1e-12);
        assert!((w[99] - 1.99).abs() < 1e-12);
        assert_eq!(&w[1..99], &v[1..99]);
        assert_eq!(winsorize(&[2.0; 7], 1.0, 99.0), vec![2.0; 7]);
        assert_eq!(winsorize(&[3.5], 1.0, 99.0), vec![3.5]);
    }

    proptest! {
        #[test]
        fn clipping_to_fixed_bounds_is_idempotent(v in prop::collection::vec(-1e3f64..1e3, 1..200)) {
            let b = winsorize_bounds(&v, 1.0, 99.0).unwrap();
            let once = clip(&v, b);
            prop_assert_eq!(clip(&once, b), once);
        }

        #[test]
        fn sue_shift_and_scale(
            hist in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4..12),
            cur in (-2.0f64..2.0, -2.0f64..2.0),
            shift in -5.0f64..5.0,
            k in 0.1f64..10.0,
        ) {
            let base = compute_sue("X", q(), &hist, cur);
            let shifted: Vec<_> = hist.iter().map(|(a, e)| (a + shift, e + shift)).collect();
            let scaled: Vec<_> = hist.iter().map(|(a, e)| (a * k, e * k)).collect();
            let s = compute_sue("X", q(), &shifted, (cur.0 + shift, cur.1 + shift));
            let c = compute_sue("X", q(), &scaled, (cur.0 * k, cur.1 * k));
            if let Some(raw) = base.sue_raw {
                let tol = 1e-6 * raw.abs().max(1.0);
                prop_assert!((s.sue_raw.unwrap() - raw).abs() < tol);
                prop_assert!((c.sue_raw.unwrap() - raw).abs() < tol);
            }
        }
    }
}
