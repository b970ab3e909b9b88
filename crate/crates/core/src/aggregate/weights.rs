//! Section weights from training-period role ICs.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::econ::{normal_two_sided_p, spearman_pairs};
use crate::panel::Panel;
use crate::transcript::SpeakerRole;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("no role has a positive training IC; weights are undefined")]
    NoAdmissibleWeights,
    #[error("temporal leak: call {call_id} dated {date} is not before the training cutoff {cutoff}")]
    TemporalLeak {
        call_id: String,
        date: NaiveDate,
        cutoff: NaiveDate,
    },
    #[error("weights file {path}: {message}")]
    Format { path: String, message: String },
    #[error("weights file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Frozen per-role weights with the training statistics behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionWeights {
    weights: [f64; 4],
    ic: [Option<f64>; 4],
    p_value: [Option<f64>; 4],
    n: [usize; 4],
    training_cutoff: NaiveDate,
    horizon: u32,
    signal_prefix: String,
}

/// `w_g = IC_g / Σ_{IC>0} IC` for positive ICs, zero otherwise.
pub fn normalize_ics(ics: &[Option<f64>; 4]) -> Result<[f64; 4], WeightError> {
    let positive = |ic: &Option<f64>| ic.filter(|v| *v > 0.0);
    let total: f64 = ics.iter().filter_map(positive).sum();
    if !(total > 0.0) {
        return Err(WeightError::NoAdmissibleWeights);
    }
    Ok(ics.map(|ic| positive(&ic).map_or(0.0, |v| v / total)))
}

/// Two-sided p-value of a rank correlation via `t = r·√((n−2)/(1−r²))`.
pub fn ic_p_value(r: f64, n: usize) -> Option<f64> {
    if n < 3 {
        return None;
    }
    if r.abs() >= 1.0 {
        return Some(0.0);
    }
    let t = r * ((n as f64 - 2.0) / (1.0 - r * r)).sqrt();
    Some(normal_two_sided_p(t))
}

impl SectionWeights {
    pub fn from_ics(ics: [Option<f64>; 4], n: [usize; 4], training_cutoff: NaiveDate) -> Result<Self, WeightError> {
        Ok(Self {
            weights: normalize_ics(&ics)?,
            p_value: [None; 4],
            ic: ics,
            n,
            training_cutoff,
            horizon: 1,
            signal_prefix: "role_".to_string(),
        })
    }

    pub fn weights(&self) -> &[f64; 4] {
        &self.weights
    }

    pub fn weight(&self, role: SpeakerRole) -> f64 {
        role.group_index().map_or(0.0, |i| self.weights[i])
    }

    pub fn ic(&self) -> &[Option<f64>; 4] {
        &self.ic
    }

    pub fn p_values(&self) -> &[Option<f64>; 4] {
        &self.p_value
    }

    pub fn n(&self) -> &[usize; 4] {
        &self.n
    }

    pub fn training_cutoff(&self) -> NaiveDate {
        self.training_cutoff
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Panel column prefix of the role means the weights were fit on.
    pub fn signal_prefix(&self) -> &str {
        &self.signal_prefix
    }

    pub fn to_toml(&self) -> String {
        let role = |i: usize| RoleEntry {
            weight: self.weights[i],
            ic: self.ic[i],
            p_value: self.p_value[i],
            n: self.n[i] as u64,
        };
        let file = WeightsFile {
            training_cutoff: self.training_cutoff.to_string(),
            horizon: self.horizon,
            signal_prefix: self.signal_prefix.clone(),
            analyst: role(0),
            cfo: role(1),
            executive: role(2),
            other: role(3),
        };
        toml::to_string(&file).expect("weights serialize to TOML")
    }

    pub fn from_toml(text: &str, path: &str) -> Result<Self, WeightError> {
        let fmt_err = |message: String| WeightError::Format {
            path: path.to_string(),
            message,
        };
        let f: WeightsFile = toml::from_str(text).map_err(|e| fmt_err(e.to_string()))?;
        let training_cutoff = NaiveDate::parse_from_str(&f.training_cutoff, "%Y-%m-%d")
            .map_err(|e| fmt_err(format!("training_cutoff: {e}")))?;
        let roles = [f.analyst, f.cfo, f.executive, f.other];
        let weights = roles.each_ref().map(|r| r.weight);
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) || (sum - 1.0).abs() > 1e-9 {
            return Err(fmt_err(format!("weights {weights:?} do not form a distribution")));
        }
        Ok(Self {
            weights,
            ic: roles.each_ref().map(|r| r.ic),
            p_value: roles.each_ref().map(|r| r.p_value),
            n: roles.each_ref().map(|r| r.n as usize),
            training_cutoff,
            horizon: f.horizon,
            signal_prefix: f.signal_prefix,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), WeightError> {
        std::fs::write(path, self.to_toml()).map_err(|source| WeightError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, WeightError> {
        let text = std::fs::read_to_string(path).map_err(|source| WeightError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct RoleEntry {
    weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
    n: u64,
}

#[derive(Serialize, Deserialize)]
struct WeightsFile {
    training_cutoff: String,
    horizon: u32,
    signal_prefix: String,
    analyst: RoleEntry,
    cfo: RoleEntry,
    executive: RoleEntry,
    other: RoleEntry,
}

/// Fit weights from per-role mean sentiment columns (`<prefix><role>`) against
/// the `horizon` return.
///
/// Every row must be dated before `cutoff`; callers filter first. Each role's
/// IC uses only the calls where that role spoke.
pub fn fit_ic_weights(
    training: &Panel,
    signal_prefix: &str,
    horizon: u32,
    cutoff: NaiveDate,
) -> Result<SectionWeights, WeightError> {
    if let Some(r) = training.rows().iter().find(|r| r.event_date >= cutoff) {
        return Err(WeightError::TemporalLeak {
            call_id: r.call_id.clone(),
            date: r.event_date,
            cutoff,
        });
    }
    let mut ic = [None; 4];
    let mut p_value = [None; 4];
    let mut n = [0usize; 4];
    for (i, role) in SpeakerRole::GROUPS.iter().enumerate() {
        let column = format!("{signal_prefix}{}", role.as_str());
        let pairs: Vec<(Option<f64>, Option<f64>)> = training
            .rows()
            .iter()
            .map(|r| (r.signal(&column), r.ret(horizon)))
            .filter(|(a, b)| a.is_some() && b.is_some())
            .collect();
        n[i] = pairs.len();
        ic[i] = spearman_pairs(pairs);
        p_value[i] = ic[i].and_then(|r| ic_p_value(r, n[i]));
    }
    Ok(SectionWeights {
        weights: normalize_ics(&ic)?,
        ic,
        p_value,
        n,
        training_cutoff: cutoff,
        horizon,
        signal_prefix: signal_prefix.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::PanelRow;
    use crate::transcript::Timing;

    fn cutoff() -> NaiveDate {
        NaiveDate::from_ymd_opt(2023, 1, 1).unwrap()
    }

    #[test]
    fn reference_ic_normalization() {
        let w = normalize_ics(&[Some(0.128), Some(0.078), Some(0.042), Some(0.015)]).unwrap();
        for (got, want) in w.iter().zip([0.488, 0.295, 0.159, 0.058]) {
            assert!((got - want).abs() <= 0.002, "{got} vs {want}");
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_ics_get_zero() {
        let w = normalize_ics(&[Some(0.1), Some(-0.05), Some(0.1), Some(0.0)]).unwrap();
        assert_eq!(w, [0.5, 0.0, 0.5, 0.0]);
        let w = normalize_ics(&[None, Some(0.2), None, None]).unwrap();
        assert_eq!(w, [0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            normalize_ics(&[Some(-0.1), Some(0.0), None, Some(-0.2)]),
            Err(WeightError::NoAdmissibleWeights)
        ));
    }

    #[test]
    fn toml_round_trip() {
        let w = SectionWeights::from_ics([Some(0.128), Some(0.078), Some(0.042), None], [11179, 10835, 10963, 0], cutoff())
            .unwrap();
        let text = w.to_toml();
        assert!(text.contains("[analyst]"));
        assert_eq!(SectionWeights::from_toml(&text, "w.toml").unwrap(), w);
        assert!(SectionWeights::from_toml("nonsense", "w.toml").is_err());
    }

    fn training_panel() -> Panel {
        let rows = (0..40)
            .map(|i| {
                let date = NaiveDate::from_ymd_opt(2021, 1 + (i % 12) as u32, 10).unwrap();
                let r = ((i * 17) % 23) as f64 / 100.0 - 0.1;
                PanelRow::new(format!("c{i}"), format!("T{i}"), date, Timing::Amc)
                    .with_signal("role_analyst", Some(r + ((i * 3) % 5) as f64 * 0.01))
                    .with_signal("role_cfo", Some(((i * 7) % 11) as f64))
                    .with_signal("role_executive", if i % 3 == 0 { None } else { Some(r * 0.5) })
                    .with_signal("role_other", Some(-r))
                    .with_return(1, Some(r))
            })
            .collect();
        Panel::new(rows).unwrap()
    }

    #[test]
    fn fit_uses_each_roles_own_sample() {
        let w = fit_ic_weights(&training_panel(), "role_", 1, cutoff()).unwrap();
        assert_eq!(w.n(), &[40, 40, 26, 40]);
        assert_eq!(w.ic()[2], Some(1.0));
        assert_eq!(w.weights()[3], 0.0);
        assert!((w.weights().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monotone_return_transform_leaves_weights_unchanged() {
        let p = training_panel();
        let mut q = p.clone();
        for r in q.rows_mut() {
            let v = r.ret(1).unwrap();
            r.returns.insert(1, Some(v.exp()));
        }
        let a = fit_ic_weights(&p, "role_", 1, cutoff()).unwrap();
        let b = fit_ic_weights(&q, "role_", 1, cutoff()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rows_at_or_after_cutoff_are_rejected() {
        let mut rows = training_panel().into_rows();
        rows.push(PanelRow::new("late", "Z", cutoff(), Timing::Bmo));
        let err = fit_ic_weights(&Panel::new(rows).unwrap(), "role_", 1, cutoff()).unwrap_err();
        assert!(matches!(err, WeightError::TemporalLeak { .. }));
    }
}
