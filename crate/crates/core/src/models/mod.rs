//! Plant models of the power-split hybrid and a fixed-step integrator.

pub mod battery;
pub mod catalyst;
pub mod engine;
pub mod road;

use serde::{Deserialize, Serialize};

pub use battery::{soc_rate, soc_rate_partials, BatteryParams, OpenCircuitVoltage, SocRate};
pub use catalyst::{catalyst_branches, catalyst_rate, CatalystParams, CatalystRate};
pub use engine::{
    coolant_rate, coolant_rate_partials, fuel_rate, nominal_fuel_rate, CoolantRate, EngineParams,
    EnginePoint, EngineThermalParams, FuelMap, OolTable, WarmupCorrection,
};
pub use road::{power_split, traction_power, PowerFlows, RoadLoadParams, GRAVITY};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub soc: f64,
    /// Coolant temperature (°C)
    pub t_cl: f64,
    /// Catalyst temperature (°C)
    pub t_cat: f64,
    pub engine_on: bool,
}

/// Power-split command for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    /// Battery terminal power including the auxiliary load (W)
    pub p_bat: f64,
    pub engine_on: bool,
}

/// All plant parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    pub battery: BatteryParams,
    pub engine: EngineParams,
    pub engine_thermal: EngineThermalParams,
    pub catalyst: CatalystParams,
    pub road_load: RoadLoadParams,
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        self.battery.validate()?;
        self.engine.validate()?;
        self.engine_thermal.validate()?;
        self.catalyst.validate()?;
        self.road_load.validate()
    }

    pub fn t_amb(&self) -> f64 {
        self.catalyst.t_amb
    }

    pub fn aux_load(&self) -> f64 {
        self.road_load.aux_electric_load
    }

    pub fn p_eng_max(&self) -> f64 {
        self.engine.max_power()
    }
}

/// Everything that flows during one step with a given command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFlows {
    pub p_trac: f64,
    pub p_eng: f64,
    pub p_brake: f64,
    pub point: EnginePoint,
    pub engine_on: bool,
    /// kg/s
    pub fuel_rate: f64,
    pub soc_rate: f64,
    pub t_cl_rate: f64,
    pub t_cat_rate: f64,
}

/// Evaluates the power balance and state rates for battery power `p_bat` at
/// speed `v` and acceleration `a`.
pub fn evaluate_step(
    s: &VehicleState,
    p_bat: f64,
    v: f64,
    a: f64,
    params: &VehicleParams,
) -> Result<StepFlows> {
    let p_trac = traction_power(v, a, &params.road_load);
    let flows = power_split(p_trac, p_bat, params.aux_load(), params.p_eng_max())?;
    let engine_on = params.engine.is_on(flows.p_eng);
    let point = if engine_on {
        params.engine.ool.lookup(flows.p_eng)?
    } else {
        EnginePoint::OFF
    };
    let t_amb = params.t_amb();
    Ok(StepFlows {
        p_trac,
        p_eng: flows.p_eng,
        p_brake: flows.p_brake,
        point,
        engine_on,
        fuel_rate: fuel_rate(&point, s.t_cl, &params.engine, params.engine_thermal.lhv),
        soc_rate: soc_rate(s.soc, p_bat, &params.battery)?,
        t_cl_rate: coolant_rate(
            s.t_cl,
            &point,
            &params.engine,
            &params.engine_thermal,
            t_amb,
        ),
        t_cat_rate: catalyst_rate(s.t_cat, v, &point, engine_on, &params.catalyst),
    })
}

/// One forward-Euler step of (SOC, T_cl, T_cat).
///
/// The engine state follows the split: it runs iff the implied engine power
/// exceeds the on threshold, and `u.engine_on` must agree. Temperatures are
/// floored at ambient.
pub fn integrate_step(
    s: &VehicleState,
    u: &ControlInput,
    v: f64,
    a: f64,
    dt: f64,
    params: &VehicleParams,
) -> Result<VehicleState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "integration step must be positive, got {dt}"
        )));
    }
    let f = evaluate_step(s, u.p_bat, v, a, params)?;
    if f.engine_on != u.engine_on {
        return Err(Error::InfeasibleDemand(format!(
            "engine_on={} commanded but split gives p_eng={} W",
            u.engine_on, f.p_eng
        )));
    }
    Ok(advance(s, &f, dt, params.t_amb()))
}

pub(crate) fn advance(s: &VehicleState, f: &StepFlows, dt: f64, t_amb: f64) -> VehicleState {
    VehicleState {
        soc: s.soc + dt * f.soc_rate,
        t_cl: (s.t_cl + dt * f.t_cl_rate).max(t_amb),
        t_cat: (s.t_cat + dt * f.t_cat_rate).max(t_amb),
        engine_on: f.engine_on,
    }
}
