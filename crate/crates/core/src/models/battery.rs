//! Equivalent-circuit battery: SOC dynamics from terminal power.
//!
//! The cell is an open-circuit source `U_oc` behind an internal resistance
//! `R_int`. Drawing power `P` gives the current
//!
//! ```text
//! I = (U_oc - sqrt(U_oc² - 4·R_int·P)) / (2·R_int)
//! ```
//!
//! and the state of charge moves at `-I / C_bat`, so discharging (`P > 0`)
//! lowers SOC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Table1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpenCircuitVoltage {
    Constant(f64),
    /// Piecewise-linear in SOC.
    Table {
        soc: Vec<f64>,
        volts: Vec<f64>,
    },
}

impl OpenCircuitVoltage {
    /// Voltage and its slope with respect to SOC.
    pub fn eval(&self, soc: f64) -> (f64, f64) {
        match self {
            OpenCircuitVoltage::Constant(u) => (*u, 0.0),
            OpenCircuitVoltage::Table { soc: s, volts } => {
                let t = Table1::new(s, volts);
                t.eval_with_slope(soc)
            }
        }
    }

    fn min_voltage(&self) -> f64 {
        match self {
            OpenCircuitVoltage::Constant(u) => *u,
            OpenCircuitVoltage::Table { volts, .. } => {
                volts.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryParams {
    /// Charge capacity (A·s)
    pub capacity: f64,
    /// Internal resistance (Ω)
    pub resistance: f64,
    pub open_circuit_voltage: OpenCircuitVoltage,
    /// Most negative (charging) terminal power (W)
    pub p_min: f64,
    /// Largest discharge power (W)
    pub p_max: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            capacity: 6.5 * 3600.0,
            resistance: 0.1,
            open_circuit_voltage: OpenCircuitVoltage::Constant(200.0),
            p_min: -25e3,
            p_max: 25e3,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.resistance > 0.0) {
            return Err(Error::InvalidParameter(
                "battery.resistance must be positive".into(),
            ));
        }
        if !(self.capacity > 0.0) {
            return Err(Error::InvalidParameter(
                "battery.capacity must be positive".into(),
            ));
        }
        if let OpenCircuitVoltage::Table { soc, volts } = &self.open_circuit_voltage {
            if soc.len() != volts.len() || soc.len() < 2 {
                return Err(Error::InvalidParameter(
                    "battery.open_circuit_voltage table needs matching soc/volts of length >= 2"
                        .into(),
                ));
            }
            if soc.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(
                    "battery.open_circuit_voltage soc knots must be increasing".into(),
                ));
            }
        }
        let u_min = self.open_circuit_voltage.min_voltage();
        if !(u_min > 0.0) {
            return Err(Error::InvalidParameter(
                "battery open-circuit voltage must be positive".into(),
            ));
        }
        if self.p_min > self.p_max {
            return Err(Error::InvalidParameter(
                "battery.p_min must not exceed p_max".into(),
            ));
        }
        let limit = u_min * u_min / (4.0 * self.resistance);
        if self.p_max > limit {
            return Err(Error::InvalidParameter(format!(
                "battery.p_max {} W exceeds U_oc²/(4·R_int) = {limit} W",
                self.p_max
            )));
        }
        Ok(())
    }

    /// Largest power the circuit can physically deliver at `soc`.
    pub fn power_limit(&self, soc: f64) -> f64 {
        let (u, _) = self.open_circuit_voltage.eval(soc);
        u * u / (4.0 * self.resistance)
    }
}

/// SOC rate and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocRate {
    pub value: f64,
    pub d_soc: f64,
    pub d_p_bat: f64,
}

/// Time derivative of SOC (1/s) for terminal power `p_bat` (W, discharge positive).
pub fn soc_rate(soc: f64, p_bat: f64, b: &BatteryParams) -> Result<f64> {
    soc_rate_partials(soc, p_bat, b).map(|r| r.value)
}

pub fn soc_rate_partials(soc: f64, p_bat: f64, b: &BatteryParams) -> Result<SocRate> {
    let (u, du_dsoc) = b.open_circuit_voltage.eval(soc);
    let r = b.resistance;
    let disc = u * u - 4.0 * r * p_bat;
    if disc < 0.0 {
        return Err(Error::BatteryLimit {
            p_bat,
            limit: u * u / (4.0 * r),
        });
    }
    let s = disc.sqrt();
    let denom = 2.0 * r * b.capacity;
    let value = -(u - s) / denom;
    // ds/du = u/s, ds/dp = -2r/s
    let (d_u, d_p_bat) = if s > 0.0 {
        (-(1.0 - u / s) / denom, -1.0 / (b.capacity * s))
    } else {
        (f64::NEG_INFINITY, f64::NEG_INFINITY)
    };
    Ok(SocRate {
        value,
        d_soc: if du_dsoc == 0.0 { 0.0 } else { d_u * du_dsoc },
        d_p_bat,
    })
}
