use serde::{Deserialize, Serialize};

use super::{generate_panel, SynthConfig, SynthError};
use crate::aggregate::Method;
use crate::panel::Panel;

/// Reference `(mean, std)` of M1-M5.
pub const TABLE3_MOMENTS: [(f64, f64); 5] = [(0.263, 0.085), (0.417, 0.133), (0.261, 0.094), (0.192, 0.072), (0.107, 0.062)];
pub const TABLE3_RETURN_SD: f64 = 0.068;

const PILOT_MONTHS: usize = 24;
const PILOT_CALLS: usize = 140;
const MAX_ITER: usize = 12;
const INNER_TOL: f64 = 0.04;
const ACCEPT_TOL: f64 = 0.08;

/// Sample moments of the aggregate columns and the 1-day return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `(mean, sample std)` for M1-M5.
    pub methods: [(f64, f64); 5],
    pub return_mean: f64,
    pub return_sd: f64,
}

impl Moments {
    /// Largest relative deviation from the reference moments.
    pub fn max_relative_error(&self) -> f64 {
        let mut worst = ((self.return_sd - TABLE3_RETURN_SD) / TABLE3_RETURN_SD).abs();
        for ((m, s), (tm, ts)) in self.methods.iter().zip(TABLE3_MOMENTS) {
            worst = worst.max(((m - tm) / tm).abs()).max(((s - ts) / ts).abs());
        }
        worst
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn panel_moments(panel: &Panel) -> Moments {
    let col = |name: &str| panel.rows().iter().filter_map(|r| r.signal(name)).collect::<Vec<_>>();
    let methods = Method::ALL.map(|m| mean_sd(&col(m.column())));
    let (return_mean, return_sd) = mean_sd(&panel.rows().iter().filter_map(|r| r.ret(1)).collect::<Vec<_>>());
    Moments {
        methods,
        return_mean,
        return_sd,
    }
}

/// Tune role means, dispersion, extreme shares and the neutral tone so that
/// the aggregate moments match the reference table.
///
/// Pilot panels (24 months × 140 calls, same seed) are simulated and the
/// four knobs updated by fixed-point steps until every moment is within 4%.
/// The best iterate is returned if it lands within 8%; M2's mean and std
/// cannot both be hit exactly, so its error is split between the two.
/// Only sentence-generation parameters change; returns, sizes and the seed
/// are kept.
pub fn calibrate_to_table3(config: &SynthConfig) -> Result<SynthConfig, SynthError> {
    config.validate()?;
    let mut cfg = config.clone();
    let mut pilot = SynthConfig {
        n_months: PILOT_MONTHS,
        calls_per_month: PILOT_CALLS,
        max_horizon: 1,
        fm_slopes: Default::default(),
        target_ic: 0.0,
        ic_schedule: Vec::new(),
        sue_ic: 0.0,
        ..cfg.clone()
    };
    let mut best = (f64::INFINITY, cfg.clone());
    for _ in 0..MAX_ITER {
        pilot.role_means = cfg.role_means;
        pilot.role_sd = cfg.role_sd;
        pilot.extreme_share = cfg.extreme_share;
        pilot.neutral_tone = cfg.neutral_tone;
        let (panel, _) = generate_panel(&pilot)?;
        let m = panel_moments(&panel);
        let err = m.max_relative_error();
        if err < best.0 {
            best = (err, cfg.clone());
        }
        if err <= INNER_TOL {
            break;
        }
        let [(m1, s1), (m2, s2), (m3, _), _, (m5, s5)] = m.methods;
        cfg.role_means[0] = (cfg.role_means[0] * TABLE3_MOMENTS[4].0 / m5).clamp(-0.9, 0.9);
        let scale_mean = TABLE3_MOMENTS[0].0 / m1;
        for v in cfg.role_means[1..].iter_mut() {
            *v = (*v * scale_mean).clamp(-0.9, 0.9);
        }
        // M2's mean/std ratio is nearly fixed by the other knobs; aim its
        // mean so the two relative errors come out equal and opposite.
        let (t2, ts2) = TABLE3_MOMENTS[1];
        let (r, target_r) = (m2 / s2, t2 / ts2);
        let eps = ((target_r - r) / (target_r + r)).max(0.0);
        let scale_e = (m2 / (t2 * (1.0 - eps))).sqrt();
        for e in cfg.extreme_share.iter_mut() {
            *e = (*e * scale_e).clamp(0.01, 0.95);
        }
        let e_bar: f64 = cfg
            .extreme_share
            .iter()
            .zip(cfg.sentence_share)
            .map(|(e, s)| e * s)
            .sum::<f64>()
            / cfg.sentence_share.iter().sum::<f64>();
        cfg.neutral_tone = (cfg.neutral_tone + 0.5 * 0.85 * (m3 - TABLE3_MOMENTS[2].0) / (1.0 - e_bar)).clamp(-0.35, 0.35);
        let scale_sd = (TABLE3_MOMENTS[0].1 / s1).powf(1.5);
        let scale_analyst = (TABLE3_MOMENTS[4].1 / s5).powf(1.5);
        cfg.role_sd[0] *= scale_analyst;
        for s in cfg.role_sd[1..].iter_mut() {
            *s *= scale_sd;
        }
    }
    if best.0 <= ACCEPT_TOL {
        return Ok(best.1);
    }
    Err(SynthError::Calibration(format!(
        "largest relative moment error {:.3} after {MAX_ITER} iterations",
        best.0
    )))
}
