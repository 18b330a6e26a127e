//! Load-leveling baseline with thermal idle logic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{power_split, VehicleParams, VehicleState};

use super::ControlDecision;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleBasedConfig {
    pub soc_target: f64,
    pub soc_low: f64,
    pub soc_high: f64,
    /// Traction power above which the engine runs (W)
    pub engine_on_power_threshold: f64,
    /// Engine power per unit SOC error added while running (W)
    pub charge_gain: f64,
    pub t_cl_idle_threshold: f64,
    pub t_cat_idle_threshold: f64,
    /// Low-power point used for thermal idling (W)
    pub idle_power: f64,
}

impl Default for RuleBasedConfig {
    fn default() -> Self {
        Self {
            soc_target: 0.6,
            soc_low: 0.55,
            soc_high: 0.65,
            engine_on_power_threshold: 12e3,
            charge_gain: 2e5,
            t_cl_idle_threshold: 50.0,
            t_cat_idle_threshold: 250.0,
            idle_power: 3e3,
        }
    }
}

impl RuleBasedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.soc_low < self.soc_target && self.soc_target < self.soc_high) {
            return Err(Error::InvalidParameter(
                "rule-based SOC levels must satisfy soc_low < soc_target < soc_high".into(),
            ));
        }
        if !(self.idle_power > 0.0
            && self.charge_gain >= 0.0
            && self.engine_on_power_threshold >= 0.0)
        {
            return Err(Error::InvalidParameter(
                "rule-based powers and gain must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// One decision of the baseline policy.
///
/// The engine runs when traction exceeds the threshold or SOC is low, at
/// `p_trac + gain·(soc_target − soc)` clipped to the engine and battery limits.
/// If that leaves the engine off while the coolant or catalyst is at or below
/// its idle threshold, the engine is held at the idle point instead.
pub fn rule_based_step(
    s: &VehicleState,
    p_trac: f64,
    p_bat_aux: f64,
    cfg: &RuleBasedConfig,
    params: &VehicleParams,
) -> Result<ControlDecision> {
    let b = &params.battery;
    let p_eng_max = params.p_eng_max();
    let demand = p_trac + p_bat_aux;
    if demand > b.p_max + p_eng_max {
        return Err(Error::InfeasibleDemand(format!(
            "demand {demand} W exceeds battery plus engine limits"
        )));
    }
    let wants_engine =
        p_trac > cfg.engine_on_power_threshold || s.soc < cfg.soc_low || demand > b.p_max;
    let cold = s.t_cl <= cfg.t_cl_idle_threshold || s.t_cat <= cfg.t_cat_idle_threshold;
    let target = if wants_engine {
        let bias = cfg.charge_gain * (cfg.soc_target - s.soc);
        Some((p_trac + bias).clamp(cfg.idle_power, p_eng_max))
    } else if cold {
        Some(cfg.idle_power)
    } else {
        None
    };
    let p_bat = match target {
        Some(p_eng) => demand - p_eng,
        None => demand,
    }
    .clamp(b.p_min.max(demand - p_eng_max), b.p_max);
    let flows = power_split(p_trac, p_bat, p_bat_aux, p_eng_max)?;
    Ok(ControlDecision {
        p_bat,
        engine_on: params.engine.is_on(flows.p_eng),
        p_eng: flows.p_eng,
        diagnostics: None,
    })
}
