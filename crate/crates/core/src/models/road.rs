//! Longitudinal road load and the engine/battery power balance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadLoadParams {
    /// Vehicle mass (kg)
    pub mass: f64,
    /// Rolling resistance coefficient
    pub rolling_coeff: f64,
    /// Lumped aerodynamic coefficient 0.5·ρ·Cd·A (kg/m)
    pub drag_area_coeff: f64,
    /// Electric auxiliary load carried by the battery (W)
    pub aux_electric_load: f64,
}

impl Default for RoadLoadParams {
    fn default() -> Self {
        Self {
            mass: 1500.0,
            rolling_coeff: 0.01,
            drag_area_coeff: 0.4,
            aux_electric_load: 500.0,
        }
    }
}

impl RoadLoadParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("road_load.mass", self.mass),
            ("road_load.rolling_coeff", self.rolling_coeff),
            ("road_load.drag_area_coeff", self.drag_area_coeff),
            ("road_load.aux_electric_load", self.aux_electric_load),
        ];
        for (name, value) in fields {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Power at the wheels needed to follow speed `v` with acceleration `a`.
///
/// Negative values are braking power available for regeneration.
pub fn traction_power(v: f64, a: f64, p: &RoadLoadParams) -> f64 {
    let force = p.mass * a + p.mass * GRAVITY * p.rolling_coeff + p.drag_area_coeff * v * v;
    force * v
}

/// How the traction demand is met for a chosen battery power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFlows {
    /// Engine mechanical output (W), never negative
    pub p_eng: f64,
    /// Power dissipated by the friction brakes (W), never positive
    pub p_brake: f64,
}

/// Engine power implied by the battery power `p_bat` (which includes the
/// auxiliary load `p_bat_aux`).
///
/// `p_eng = p_trac - (p_bat - p_bat_aux)`. A negative remainder can only occur
/// while braking and is reported as friction-brake power, so that
/// `p_eng + (p_bat - p_bat_aux) + p_brake = p_trac` always holds.
pub fn power_split(p_trac: f64, p_bat: f64, p_bat_aux: f64, p_eng_max: f64) -> Result<PowerFlows> {
    let required = p_trac - (p_bat - p_bat_aux);
    if required > p_eng_max {
        return Err(Error::InfeasibleSplit {
            required,
            max: p_eng_max,
        });
    }
    if required >= 0.0 {
        Ok(PowerFlows {
            p_eng: required,
            p_brake: 0.0,
        })
    } else {
        Ok(PowerFlows {
            p_eng: 0.0,
            p_brake: required,
        })
    }
}
