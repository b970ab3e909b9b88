use std::path::{Path, PathBuf};

use callvoice::pipeline::{AnalysisSettings, InputPaths, PanelOptions};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Input file locations. Relative paths resolve against the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsSection {
    pub transcripts: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    pub earnings: Option<PathBuf>,
    pub factors: Option<PathBuf>,
    pub lexicon_positive: Option<PathBuf>,
    pub lexicon_negative: Option<PathBuf>,
    /// Panel read by `fit-weights` and `signals`; defaults to `<output_dir>/panel.csv`.
    pub panel: Option<PathBuf>,
    /// Panel read by the test stages; defaults to `<output_dir>/signals.csv`.
    pub signals: Option<PathBuf>,
    /// Frozen weights; defaults to `<output_dir>/weights.toml`.
    pub weights: Option<PathBuf>,
    pub lm_weights: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub output_dir: PathBuf,
    pub training_cutoff: NaiveDate,
    pub winsor_lower: f64,
    pub winsor_upper: f64,
    pub min_monthly_obs: usize,
    pub extreme_threshold: f64,
    pub horizons: Vec<u32>,
    pub max_horizon: u32,
    pub weight_horizon: u32,
    pub decay_horizons: Vec<u32>,
    pub car_days: usize,
    pub benchmark: String,
    pub signal: String,
    pub control: String,
}

impl Default for RunSection {
    fn default() -> Self {
        let a = AnalysisSettings::default();
        let p = PanelOptions::default();
        Self {
            output_dir: PathBuf::from("out"),
            training_cutoff: a.training_cutoff,
            winsor_lower: p.winsor.0,
            winsor_upper: p.winsor.1,
            min_monthly_obs: a.min_monthly_obs,
            extreme_threshold: p.extreme_threshold,
            horizons: a.horizons,
            max_horizon: p.max_horizon,
            weight_horizon: 1,
            decay_horizons: a.decay_horizons,
            car_days: a.car_days,
            benchmark: "SPX".to_string(),
            signal: a.signal,
            control: a.control,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub inputs: InputsSection,
    #[serde(default)]
    pub run: RunSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub training_cutoff: Option<NaiveDate>,
    pub signal: Option<String>,
    pub panel: Option<PathBuf>,
    pub signals: Option<PathBuf>,
    pub weights: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.apply(ov);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let i = &mut self.inputs;
        for p in [
            &mut i.transcripts,
            &mut i.scores,
            &mut i.prices,
            &mut i.earnings,
            &mut i.factors,
            &mut i.lexicon_positive,
            &mut i.lexicon_negative,
            &mut i.panel,
            &mut i.signals,
            &mut i.weights,
            &mut i.lm_weights,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.run.output_dir);
    }

    fn apply(&mut self, ov: &Overrides) {
        if let Some(d) = &ov.output_dir {
            self.run.output_dir = d.clone();
        }
        if let Some(c) = ov.training_cutoff {
            self.run.training_cutoff = c;
        }
        if let Some(s) = &ov.signal {
            self.run.signal = s.clone();
        }
        for (dst, src) in [
            (&mut self.inputs.panel, &ov.panel),
            (&mut self.inputs.signals, &ov.signals),
            (&mut self.inputs.weights, &ov.weights),
        ] {
            if src.is_some() {
                dst.clone_from(src);
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let r = &self.run;
        if !(0.0 <= r.winsor_lower && r.winsor_lower < r.winsor_upper && r.winsor_upper <= 100.0) {
            return Err(config_err("winsor percentiles must satisfy 0 <= lower < upper <= 100"));
        }
        if !(0.0..1.0).contains(&r.extreme_threshold) {
            return Err(config_err("extreme_threshold must lie in [0, 1)"));
        }
        if r.max_horizon == 0 || r.car_days == 0 || r.min_monthly_obs < 3 {
            return Err(config_err("max_horizon and car_days must be positive and min_monthly_obs at least 3"));
        }
        if r.horizons.is_empty() || r.decay_horizons.is_empty() {
            return Err(config_err("horizons and decay_horizons must not be empty"));
        }
        if let Some(h) = r
            .horizons
            .iter()
            .chain(&r.decay_horizons)
            .chain([&r.weight_horizon])
            .find(|h| **h == 0 || **h > r.max_horizon)
        {
            return Err(config_err(format!("horizon {h} is outside 1..={}", r.max_horizon)));
        }
        if self.inputs.lexicon_positive.is_some() != self.inputs.lexicon_negative.is_some() {
            return Err(config_err("lexicon_positive and lexicon_negative must be given together"));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(toml::to_string(self).expect("config serializes").as_bytes()))
    }

    pub fn input_paths(&self) -> Result<InputPaths, CliError> {
        let need = |p: &Option<PathBuf>, key: &str| {
            p.clone().ok_or_else(|| config_err(format!("[inputs] {key} is required for this subcommand")))
        };
        let i = &self.inputs;
        Ok(InputPaths {
            transcripts: need(&i.transcripts, "transcripts")?,
            scores: need(&i.scores, "scores")?,
            prices: need(&i.prices, "prices")?,
            earnings: need(&i.earnings, "earnings")?,
            factors: need(&i.factors, "factors")?,
            lexicon: i.lexicon_positive.clone().zip(i.lexicon_negative.clone()),
        })
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.run.output_dir.join(name)
    }

    pub fn panel_path(&self) -> PathBuf {
        self.inputs.panel.clone().unwrap_or_else(|| self.out("panel.csv"))
    }

    pub fn signals_path(&self) -> PathBuf {
        self.inputs.signals.clone().unwrap_or_else(|| self.out("signals.csv"))
    }

    pub fn weights_path(&self) -> PathBuf {
        self.inputs.weights.clone().unwrap_or_else(|| self.out("weights.toml"))
    }

    pub fn lm_weights_path(&self) -> PathBuf {
        self.inputs.lm_weights.clone().unwrap_or_else(|| self.out("lm_weights.toml"))
    }

    pub fn panel_options(&self) -> PanelOptions {
        PanelOptions {
            extreme_threshold: self.run.extreme_threshold,
            winsor: (self.run.winsor_lower, self.run.winsor_upper),
            max_horizon: self.run.max_horizon,
        }
    }

    pub fn analysis(&self) -> AnalysisSettings {
        let r = &self.run;
        AnalysisSettings {
            training_cutoff: r.training_cutoff,
            min_monthly_obs: r.min_monthly_obs,
            horizons: r.horizons.clone(),
            decay_horizons: r.decay_horizons.clone(),
            car_days: r.car_days,
            signal: r.signal.clone(),
            control: r.control.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[inputs]\ntranscripts = \"t.jsonl\"\n[run]\nmin_monthly_obs = 25\n").unwrap();
        let cfg = RunConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.inputs.transcripts, Some(dir.path().join("t.jsonl")));
        assert_eq!(cfg.run.training_cutoff, NaiveDate::from_ymd_opt(2023, 1, 1).unwrap());
        assert_eq!(cfg.run.min_monthly_obs, 25);
        assert_eq!(cfg.run.extreme_threshold, 0.5);
        assert_eq!((cfg.run.winsor_lower, cfg.run.winsor_upper), (1.0, 99.0));
        assert_eq!(cfg.panel_path(), dir.path().join("out").join("panel.csv"));
    }

    #[test]
    fn overrides_win_and_bad_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[run]\nsignal = \"m1\"\n").unwrap();
        let ov = Overrides {
            signal: Some("m5".into()),
            ..Overrides::default()
        };
        assert_eq!(RunConfig::load(&path, &ov).unwrap().run.signal, "m5");
        std::fs::write(&path, "[run]\nsignl = \"m1\"\n").unwrap();
        assert!(matches!(RunConfig::load(&path, &ov), Err(CliError::Config(_))));
        std::fs::write(&path, "[run]\nhorizons = [0]\n").unwrap();
        assert!(matches!(RunConfig::load(&path, &ov), Err(CliError::Config(_))));
    }
}
