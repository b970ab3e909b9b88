use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::panel::YearMonth;

/// Generating parameters for a synthetic panel.
///
/// Per-role arrays are indexed like [`SpeakerRole::GROUPS`](crate::transcript::SpeakerRole::GROUPS):
/// analyst, CFO, executive, other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_months: usize,
    pub calls_per_month: usize,
    pub start_month: YearMonth,
    /// Mean sentences per call; counts are uniform on `[n/2, 3n/2]`.
    pub mean_sentences: usize,

    /// Mean of the call-level role mean net score.
    pub role_means: [f64; 4],
    /// Cross-call standard deviation of the latent role tone.
    pub role_sd: [f64; 4],
    /// Share of sentences in the extreme strata (`|τ| > 0.7`).
    pub extreme_share: [f64; 4],
    /// Unconditional share of all sentences spoken by each role.
    pub sentence_share: [f64; 4],
    /// Probability that a role speaks on a call.
    pub presence: [f64; 4],
    /// Share of latent tone variance common to all roles on a call.
    pub kappa: f64,
    /// Centre of the neutral-sentence net score.
    pub neutral_tone: f64,
    /// Mean confidence a neutral sentence carries beyond `|τ|`.
    pub neutral_confidence: f64,
    /// Role weights used for the section-weighted column.
    pub true_weights: [f64; 4],

    /// Signal whose within-month ranks drive returns in copula mode.
    pub driver: String,
    /// Target monthly rank IC between `driver` and the 1-day return.
    pub target_ic: f64,
    /// Per-horizon IC targets (entry `h−1` for horizon `h`). Empty means
    /// geometric decay from `target_ic` with half-life `ic_half_life`.
    pub ic_schedule: Vec<f64>,
    pub ic_half_life: f64,
    /// Longest forward-return horizon, in trading days.
    pub max_horizon: u32,

    /// Standard deviation of the 1-day return.
    pub noise_sd: f64,
    /// Standard deviation added per extra trading day of horizon.
    pub later_day_sd: f64,
    pub return_mean: f64,
    pub later_day_mean: f64,
    /// Monthly slopes on within-month z-scored signals. Non-empty switches
    /// returns from copula mode to linear mode.
    pub fm_slopes: BTreeMap<String, f64>,

    /// Rank IC between SUE and the 1-day return in copula mode, added on
    /// top of the driver dependence through an independent normal score.
    pub sue_ic: f64,

    pub ff5_months: usize,
    pub ff5_alpha_monthly: f64,
    pub ff5_loadings: [f64; 5],
    pub ff5_noise_sd: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 20150401,
            n_months: 117,
            calls_per_month: 140,
            start_month: YearMonth::new(2015, 4),
            mean_sentences: 60,
            role_means: [0.1, 0.293, 0.356, 0.187],
            role_sd: [0.041, 0.155, 0.155, 0.141],
            extreme_share: [0.149, 0.485, 0.401, 0.252],
            sentence_share: [0.202, 0.263, 0.51, 0.025],
            presence: [0.99, 0.97, 0.98, 0.36],
            kappa: 0.5,
            neutral_tone: 0.056,
            neutral_confidence: 0.25,
            true_weights: [0.488, 0.295, 0.159, 0.058],
            driver: "m4".to_string(),
            target_ic: 0.12,
            ic_schedule: Vec::new(),
            ic_half_life: 6.0,
            max_horizon: 21,
            noise_sd: 0.068,
            later_day_sd: 0.02,
            return_mean: 0.003,
            later_day_mean: 0.00075,
            fm_slopes: BTreeMap::new(),
            sue_ic: 0.0,
            ff5_months: 100,
            ff5_alpha_monthly: 0.02,
            ff5_loadings: [0.1223, -0.1816, 0.2002, -0.1077, -0.1953],
            ff5_noise_sd: 0.031,
        }
    }
}

impl SynthConfig {
    /// Small panel for smoke tests and examples.
    pub fn small(seed: u64) -> Self {
        Self {
            seed,
            n_months: 24,
            calls_per_month: 40,
            start_month: YearMonth::new(2021, 1),
            mean_sentences: 30,
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let cfg: Self = toml::from_str(text).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// IC target for each horizon `1..=max_horizon`.
    pub fn resolved_schedule(&self) -> Vec<f64> {
        (1..=self.max_horizon)
            .map(|h| match self.ic_schedule.get(h as usize - 1) {
                Some(v) => *v,
                None if self.ic_schedule.is_empty() => {
                    self.target_ic * 0.5f64.powf((h - 1) as f64 / self.ic_half_life)
                }
                None => *self.ic_schedule.last().unwrap(),
            })
            .collect()
    }

    pub fn linear_mode(&self) -> bool {
        !self.fm_slopes.is_empty()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.n_months == 0 || self.calls_per_month == 0 {
            return bad("n_months and calls_per_month must be positive".into());
        }
        if self.mean_sentences < 4 {
            return bad("mean_sentences must be at least 4".into());
        }
        for (name, xs) in [("presence", &self.presence), ("extreme_share", &self.extreme_share)] {
            if xs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return bad(format!("{name} entries must lie in [0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return bad("kappa must lie in [0, 1]".into());
        }
        if self.sentence_share.iter().any(|s| !(*s >= 0.0)) || !(self.sentence_share.iter().sum::<f64>() > 0.0) {
            return bad("sentence_share must be non-negative with a positive sum".into());
        }
        if self.true_weights.iter().any(|w| !(*w >= 0.0)) || !(self.true_weights.iter().sum::<f64>() > 0.0) {
            return bad("true_weights must be non-negative with a positive sum".into());
        }
        if self.role_sd.iter().any(|s| !(*s >= 0.0)) {
            return bad("role_sd entries must be non-negative".into());
        }
        if self.role_sd.iter().all(|s| *s == 0.0) {
            return bad("role_sd is zero for every role; sentiment would have no cross-sectional variation".into());
        }
        if self.role_means.iter().any(|m| !m.is_finite() || m.abs() > 0.9) {
            return bad("role_means must lie in [-0.9, 0.9]".into());
        }
        if !(self.neutral_tone.abs() <= 0.35) {
            return bad("neutral_tone must lie in [-0.35, 0.35]".into());
        }
        if !(0.0..=0.25).contains(&self.neutral_confidence) {
            return bad("neutral_confidence must lie in [0, 0.25]".into());
        }
        if !(self.noise_sd > 0.0) || !self.noise_sd.is_finite() {
            return bad("noise_sd must be positive".into());
        }
        if !(self.later_day_sd >= 0.0) {
            return bad("later_day_sd must be non-negative".into());
        }
        if self.max_horizon == 0 {
            return bad("max_horizon must be at least 1".into());
        }
        if !(self.ic_half_life > 0.0) {
            return bad("ic_half_life must be positive".into());
        }
        for (h, ic) in self.resolved_schedule().iter().enumerate() {
            if !(ic.abs() < 1.0) {
                return bad(format!("IC target {ic} at horizon {} is not achievable (must lie in (-1, 1))", h + 1));
            }
        }
        if !(self.sue_ic.abs() < 1.0) {
            return bad("sue_ic must lie in (-1, 1)".into());
        }
        let a = super::copula_correlation(self.target_ic);
        let b = super::copula_correlation(self.sue_ic);
        if !self.linear_mode() && a * a + b * b >= 1.0 {
            return bad("target_ic and sue_ic jointly exceed the achievable dependence".into());
        }
        if self.fm_slopes.values().any(|s| !s.is_finite()) {
            return bad("fm_slopes must be finite".into());
        }
        if self.ff5_months < 12 {
            return bad("ff5_months must be at least 12".into());
        }
        if !(self.ff5_noise_sd > 0.0) {
            return bad("ff5_noise_sd must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let c = SynthConfig::default();
        c.validate().unwrap();
        assert_eq!(SynthConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn geometric_schedule() {
        let c = SynthConfig::default();
        let s = c.resolved_schedule();
        assert_eq!(s.len(), 21);
        assert_eq!(s[0], 0.12);
        assert!((s[6] - 0.06).abs() < 1e-15);
        let c = SynthConfig {
            ic_schedule: vec![0.1, 0.05],
            max_horizon: 4,
            ..c
        };
        assert_eq!(c.resolved_schedule(), [0.1, 0.05, 0.05, 0.05]);
    }

    #[test]
    fn rejects_invalid() {
        let base = SynthConfig::default();
        let cases = [
            SynthConfig { presence: [1.2, 1.0, 1.0, 1.0], ..base.clone() },
            SynthConfig { target_ic: 1.0, ..base.clone() },
            SynthConfig { noise_sd: 0.0, ..base.clone() },
            SynthConfig { role_sd: [0.0; 4], ..base.clone() },
            SynthConfig { calls_per_month: 0, ..base.clone() },
            SynthConfig { ff5_months: 5, ..base.clone() },
            SynthConfig { target_ic: 0.9, sue_ic: 0.9, ..base.clone() },
        ];
        for c in cases {
            assert!(matches!(c.validate(), Err(SynthError::InvalidConfig(_))), "{c:?}");
        }
        assert!(SynthConfig::from_toml("seed = 1\nbogus = 2").is_err());
    }
}
