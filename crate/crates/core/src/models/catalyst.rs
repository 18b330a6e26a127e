//! Switching model of the three-way catalyst temperature.
//!
//! With the engine running the brick is heated by exhaust flow, a quadratic
//! in engine speed and torque, and cooled in proportion to its excess over
//! ambient at a rate that grows with vehicle speed. With the engine off it
//! relaxes toward ambient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::engine::EnginePoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalystParams {
    pub alpha: [f64; 8],
    /// Off-mode relaxation rate (1/s)
    pub beta_1: f64,
    /// Off-mode constant cooling (°C/s)
    pub beta_2: f64,
    /// Ambient temperature (°C), also used by the coolant model
    pub t_amb: f64,
    /// Light-off temperature (°C)
    pub light_off: f64,
}

impl Default for CatalystParams {
    fn default() -> Self {
        Self {
            alpha: [
                -1.6065e-2, -1.8535e-6, 9.8852e-3, -8.2564e-5, 5.1029e-3, -1.6444e-4, 1.5473e-6,
                6.8078,
            ],
            beta_1: -1e-3,
            beta_2: -0.2,
            t_amb: 0.0,
            light_off: 250.0,
        }
    }
}

impl CatalystParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_1 < 0.0 && self.beta_2 < 0.0) {
            return Err(Error::InvalidParameter(
                "catalyst.beta_1 and beta_2 must be negative".into(),
            ));
        }
        if !(self.light_off > self.t_amb) {
            return Err(Error::InvalidParameter(
                "catalyst.light_off must exceed t_amb".into(),
            ));
        }
        if self.alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter(
                "catalyst.alpha must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Catalyst rate for each branch and the partials of the on branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalystRate {
    pub on: f64,
    pub off: f64,
    pub d_on_t_cat: f64,
    pub d_off_t_cat: f64,
    pub d_on_omega: f64,
    pub d_on_tau: f64,
}

pub fn catalyst_branches(
    t_cat: f64,
    v_veh: f64,
    pt: &EnginePoint,
    c: &CatalystParams,
) -> CatalystRate {
    let [a1, a2, a3, a4, a5, a6, a7, a8] = c.alpha;
    let (w, tau) = (pt.omega_e, pt.tau_e);
    let excess = t_cat - c.t_amb;
    let k_on = a1 + a2 * v_veh;
    CatalystRate {
        on: k_on * excess + a3 * w + a4 * w * w + a5 * tau + a6 * tau * tau + a7 * w * w * tau + a8,
        off: c.beta_1 * excess + c.beta_2,
        d_on_t_cat: k_on,
        d_off_t_cat: c.beta_1,
        d_on_omega: a3 + 2.0 * a4 * w + 2.0 * a7 * w * tau,
        d_on_tau: a5 + 2.0 * a6 * tau + a7 * w * w,
    }
}

/// Catalyst temperature rate (°C/s) for the active branch.
pub fn catalyst_rate(
    t_cat: f64,
    v_veh: f64,
    pt: &EnginePoint,
    engine_on: bool,
    c: &CatalystParams,
) -> f64 {
    let r = catalyst_branches(t_cat, v_veh, pt, c);
    if engine_on {
        r.on
    } else {
        r.off
    }
}
