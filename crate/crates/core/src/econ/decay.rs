//! IC across return horizons.

use serde::{Deserialize, Serialize};

use super::ic::monthly_ic;
use super::EconError;
use crate::panel::Panel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub horizon: u32,
    pub mean_ic: f64,
    pub t_nw: f64,
    pub p_value: f64,
    pub n_months: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub signal: String,
    pub points: Vec<DecayPoint>,
    /// First horizon whose IC falls below half the first horizon's IC.
    pub half_life: Option<u32>,
}

pub fn decay_profile(panel: &Panel, signal: &str, horizons: &[u32], min_obs: usize) -> Result<DecayProfile, EconError> {
    let points = horizons
        .iter()
        .map(|&h| {
            monthly_ic(panel, signal, h, min_obs).map(|s| DecayPoint {
                horizon: h,
                mean_ic: s.mean_ic,
                t_nw: s.t_nw,
                p_value: s.p_value,
                n_months: s.n_months(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let half_life = points.first().and_then(|first| {
        let half = 0.5 * first.mean_ic;
        points.iter().find(|p| p.mean_ic < half).map(|p| p.horizon)
    });
    Ok(DecayProfile {
        signal: signal.to_string(),
        points,
        half_life,
    })
}
