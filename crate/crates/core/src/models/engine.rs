//! Engine operating line, fuel map, warm-up correction and the coolant heat
//! balance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Pchip;

/// Engine speed/torque/power triple on the optimal operating line.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnginePoint {
    /// rad/s
    pub omega_e: f64,
    /// N·m
    pub tau_e: f64,
    /// W
    pub p_eng: f64,
}

impl EnginePoint {
    pub const OFF: EnginePoint = EnginePoint {
        omega_e: 0.0,
        tau_e: 0.0,
        p_eng: 0.0,
    };
}

/// Speed along the optimal operating line, tabulated against power and
/// interpolated with a monotone cubic so the speed is C¹ in power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OolTable {
    /// Power knots (W), first knot 0
    pub power: Vec<f64>,
    /// Engine speed at each knot (rad/s)
    pub speed: Vec<f64>,
}

impl Default for OolTable {
    fn default() -> Self {
        Self {
            power: vec![0.0, 5e3, 10e3, 15e3, 20e3, 25e3, 30e3, 40e3, 50e3, 60e3],
            speed: vec![
                0.0, 110.0, 130.0, 150.0, 170.0, 190.0, 210.0, 250.0, 280.0, 300.0,
            ],
        }
    }
}

/// Speed and torque along the operating line with their slopes in power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OolSample {
    pub point: EnginePoint,
    pub d_omega: f64,
    pub d_tau: f64,
}

impl OolTable {
    pub fn validate(&self) -> Result<()> {
        if self.power.len() != self.speed.len() || self.power.len() < 2 {
            return Err(Error::InvalidParameter(
                "engine.ool needs matching power/speed knots".into(),
            ));
        }
        if self.power[0] != 0.0 || self.speed[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "engine.ool must start at (0 W, 0 rad/s)".into(),
            ));
        }
        if self.power.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "engine.ool power knots must increase".into(),
            ));
        }
        if self.speed.windows(2).any(|w| w[1] < w[0]) || self.speed[1] <= 0.0 {
            return Err(Error::InvalidParameter(
                "engine.ool speed must be non-decreasing and positive".into(),
            ));
        }
        Ok(())
    }

    pub fn max_power(&self) -> f64 {
        *self.power.last().expect("validated table")
    }

    /// Operating point delivering `p_eng`. Torque is recomputed as `p/ω` so
    /// the point lies exactly on the power hyperbola.
    pub fn lookup(&self, p_eng: f64) -> Result<EnginePoint> {
        let max = self.max_power();
        if !(0.0..=max).contains(&p_eng) {
            return Err(Error::OutOfRange {
                what: "engine power",
                value: p_eng,
                lo: 0.0,
                hi: max,
            });
        }
        Ok(self.sample(p_eng).point)
    }

    /// Like [`OolTable::lookup`] but without range checks (clamped) and with
    /// slopes, for the optimizer.
    pub fn sample(&self, p_eng: f64) -> OolSample {
        if p_eng <= 0.0 {
            return OolSample {
                point: EnginePoint::OFF,
                d_omega: 0.0,
                d_tau: 0.0,
            };
        }
        let p = p_eng.min(self.max_power());
        let (omega, d_omega) = Pchip::new(&self.power, &self.speed).eval_with_slope(p);
        let tau = p / omega;
        let d_tau = (omega - p * d_omega) / (omega * omega);
        OolSample {
            point: EnginePoint {
                omega_e: omega,
                tau_e: tau,
                p_eng: p,
            },
            d_omega,
            d_tau,
        }
    }
}

/// Cold-engine fuel penalty `α(T_cl)`: linear from `cold_factor` at
/// `cold_temp` down to 1 at `warm_temp`, flat outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarmupCorrection {
    pub cold_temp: f64,
    pub cold_factor: f64,
    pub warm_temp: f64,
}

impl Default for WarmupCorrection {
    fn default() -> Self {
        Self {
            cold_temp: -10.0,
            cold_factor: 1.3,
            warm_temp: 60.0,
        }
    }
}

impl WarmupCorrection {
    /// `α(t_cl)` and its slope.
    pub fn eval(&self, t_cl: f64) -> (f64, f64) {
        if t_cl >= self.warm_temp {
            (1.0, 0.0)
        } else if t_cl <= self.cold_temp {
            (self.cold_factor, 0.0)
        } else {
            let slope = -(self.cold_factor - 1.0) / (self.warm_temp - self.cold_temp);
            (1.0 + slope * (t_cl - self.warm_temp), slope)
        }
    }
}

/// Willans-line fuel map along the operating line.
///
/// A running engine burns `F(p) = idle + a·p + b·p²` of chemical power to
/// deliver `p`. Brake efficiency `p / F(p)` rises from zero, peaks at
/// `p* = sqrt(idle / b)` and falls off slowly above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuelMap {
    /// Fuel power at zero output (W)
    pub idle_fuel_power: f64,
    /// Marginal fuel power per unit output at low load
    pub linear_coeff: f64,
    /// Curvature (1/W)
    pub quadratic_coeff: f64,
}

impl Default for FuelMap {
    fn default() -> Self {
        Self {
            idle_fuel_power: 8e3,
            linear_coeff: 2.4,
            quadratic_coeff: 6.5e-6,
        }
    }
}

impl FuelMap {
    pub fn validate(&self) -> Result<()> {
        if !(self.idle_fuel_power > 0.0 && self.linear_coeff > 1.0 && self.quadratic_coeff >= 0.0) {
            return Err(Error::InvalidParameter(
                "engine.fuel_map needs idle_fuel_power > 0, linear_coeff > 1, quadratic_coeff >= 0"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Chemical power (W) burned by a running engine delivering `p_eng`, and its slope.
    pub fn fuel_power(&self, p_eng: f64) -> (f64, f64) {
        let p = p_eng.max(0.0);
        (
            self.idle_fuel_power + self.linear_coeff * p + self.quadratic_coeff * p * p,
            self.linear_coeff + 2.0 * self.quadratic_coeff * p,
        )
    }

    /// Output power of peak brake efficiency (W).
    pub fn best_efficiency_power(&self) -> f64 {
        if self.quadratic_coeff > 0.0 {
            (self.idle_fuel_power / self.quadratic_coeff).sqrt()
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineParams {
    pub ool: OolTable,
    pub fuel_map: FuelMap,
    pub warmup: WarmupCorrection,
    /// Output above which the engine counts as running (W)
    pub on_threshold: f64,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            ool: OolTable::default(),
            fuel_map: FuelMap::default(),
            warmup: WarmupCorrection::default(),
            on_threshold: 100.0,
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        self.ool.validate()?;
        self.fuel_map.validate()?;
        if !(self.warmup.cold_factor >= 1.0) || !(self.warmup.warm_temp > self.warmup.cold_temp) {
            return Err(Error::InvalidParameter(
                "engine.warmup must have cold_factor >= 1 and warm_temp > cold_temp".into(),
            ));
        }
        if !(self.on_threshold > 0.0) {
            return Err(Error::InvalidParameter(
                "engine.on_threshold must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn max_power(&self) -> f64 {
        self.ool.max_power()
    }

    pub fn is_on(&self, p_eng: f64) -> bool {
        p_eng > self.on_threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineThermalParams {
    /// Equivalent thermal mass of the cooling system (kg)
    pub thermal_mass: f64,
    /// Equivalent specific heat (J/(kg·°C))
    pub thermal_capacity: f64,
    /// Lower heating value of the fuel (J/kg)
    pub lhv: f64,
    /// Share of the fuel heat leaving with the exhaust
    pub exhaust_fraction: f64,
    /// Convective conductance to ambient (W/°C)
    pub air_conductance: f64,
    /// Cabin heater draw from the coolant when heating is on (W)
    pub heat_demand: f64,
    pub heating_enabled: bool,
}

impl Default for EngineThermalParams {
    fn default() -> Self {
        Self {
            thermal_mass: 120.0,
            thermal_capacity: 850.0,
            lhv: 43e6,
            exhaust_fraction: 0.3,
            air_conductance: 25.0,
            heat_demand: 3000.0,
            heating_enabled: true,
        }
    }
}

impl EngineThermalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("engine_thermal.thermal_mass", self.thermal_mass),
            ("engine_thermal.thermal_capacity", self.thermal_capacity),
            ("engine_thermal.lhv", self.lhv),
            ("engine_thermal.air_conductance", self.air_conductance),
            ("engine_thermal.heat_demand", self.heat_demand),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.exhaust_fraction > 0.0 && self.exhaust_fraction < 1.0) {
            return Err(Error::InvalidParameter(
                "engine_thermal.exhaust_fraction must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn heat_capacity(&self) -> f64 {
        self.thermal_mass * self.thermal_capacity
    }

    pub fn cabin_heat(&self) -> f64 {
        if self.heating_enabled {
            self.heat_demand
        } else {
            0.0
        }
    }
}

/// Nominal fuel rate (kg/s) of a running engine at `pt`, before the warm-up correction.
pub fn nominal_fuel_rate(pt: &EnginePoint, engine: &EngineParams, lhv: f64) -> f64 {
    engine.fuel_map.fuel_power(pt.omega_e * pt.tau_e).0 / lhv
}

/// Fuel mass rate (kg/s): `α(t_cl)·f_fuel(ω, τ)`, zero when the engine is off.
pub fn fuel_rate(pt: &EnginePoint, t_cl: f64, engine: &EngineParams, lhv: f64) -> f64 {
    if !engine.is_on(pt.p_eng) {
        return 0.0;
    }
    engine.warmup.eval(t_cl).0 * nominal_fuel_rate(pt, engine, lhv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolantRate {
    pub value: f64,
    pub d_t_cl: f64,
    /// Slope along the operating line (°C/s per W); zero with the engine off.
    pub d_p_eng: f64,
}

/// Coolant temperature rate (°C/s) from the engine heat balance.
pub fn coolant_rate(
    t_cl: f64,
    pt: &EnginePoint,
    engine: &EngineParams,
    thermal: &EngineThermalParams,
    t_amb: f64,
) -> f64 {
    coolant_rate_partials(t_cl, pt.p_eng, engine, thermal, t_amb).value
}

pub fn coolant_rate_partials(
    t_cl: f64,
    p_eng: f64,
    engine: &EngineParams,
    thermal: &EngineThermalParams,
    t_amb: f64,
) -> CoolantRate {
    let mc = thermal.heat_capacity();
    let q_air = thermal.air_conductance * (t_cl - t_amb);
    let losses = q_air + thermal.cabin_heat();
    if !engine.is_on(p_eng) {
        return CoolantRate {
            value: -losses / mc,
            d_t_cl: -thermal.air_conductance / mc,
            d_p_eng: 0.0,
        };
    }
    let (alpha, d_alpha) = engine.warmup.eval(t_cl);
    let (fuel_power, d_fuel_power) = engine.fuel_map.fuel_power(p_eng);
    // Q_fuel = LHV·ṁ = α·F(p)
    let q_fuel = alpha * fuel_power;
    let retained = 1.0 - thermal.exhaust_fraction;
    CoolantRate {
        value: (retained * q_fuel - p_eng - losses) / mc,
        d_t_cl: (retained * d_alpha * fuel_power - thermal.air_conductance) / mc,
        d_p_eng: (retained * alpha * d_fuel_power - 1.0) / mc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ool_zero_power_is_off() {
        let t = OolTable::default();
        assert_eq!(t.lookup(0.0).unwrap(), EnginePoint::OFF);
        assert!(t.lookup(-1.0).is_err());
        assert!(t.lookup(60e3 + 1.0).is_err());
    }

    #[test]
    fn ool_knot_reads_back() {
        let t = OolTable::default();
        let pt = t.lookup(30e3).unwrap();
        assert_eq!(pt.omega_e, 210.0);
        assert_relative_eq!(pt.tau_e, 30e3 / 210.0, max_relative = 1e-15);
    }

    #[test]
    fn ool_midpoint_stays_on_power_hyperbola() {
        let t = OolTable::default();
        let pt = t.lookup(35e3).unwrap();
        assert!(pt.omega_e > 210.0 && pt.omega_e < 250.0);
        assert!((pt.omega_e * pt.tau_e - 35e3).abs() <= 1e-9 * 35e3);
    }

    #[test]
    fn warmup_correction_shape() {
        let w = WarmupCorrection::default();
        assert_eq!(w.eval(90.0).0, 1.0);
        assert_eq!(w.eval(60.0).0, 1.0);
        assert_relative_eq!(w.eval(-10.0).0, 1.3);
        // 1.3 - 0.3·30/70
        assert_relative_eq!(
            w.eval(20.0).0,
            1.3 - 0.3 * 30.0 / 70.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(w.eval(-40.0).0, 1.3);
    }

    #[test]
    fn fuel_rate_cases() {
        let e = EngineParams::default();
        let lhv = 43e6;
        assert_eq!(fuel_rate(&EnginePoint::OFF, 90.0, &e, lhv), 0.0);
        let pt = e.ool.lookup(20e3).unwrap();
        let nominal = nominal_fuel_rate(&pt, &e, lhv);
        assert_eq!(fuel_rate(&pt, 90.0, &e, lhv), nominal);
        let alpha20 = 1.3 - 0.3 * 30.0 / 70.0;
        assert_relative_eq!(
            fuel_rate(&pt, 20.0, &e, lhv),
            alpha20 * nominal,
            max_relative = 1e-14
        );
    }

    #[test]
    fn fuel_map_offset_and_peak() {
        let m = FuelMap::default();
        assert_eq!(m.fuel_power(0.0).0, 8e3);
        // 8000 + 2.4·30e3 + 6.5e-6·9e8
        assert_relative_eq!(m.fuel_power(30e3).0, 85_850.0, max_relative = 1e-12);
        let best = (1..=600)
            .map(|k| k as f64 * 100.0)
            .map(|p| (p, p / m.fuel_power(p).0))
            .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        assert!(best.1 > 0.34 && best.1 < 0.36, "{best:?}");
        assert!((best.0 - m.best_efficiency_power()).abs() <= 100.0);
    }

    #[test]
    fn coolant_off_at_ambient_is_zero() {
        let e = EngineParams::default();
        let th = EngineThermalParams {
            heating_enabled: false,
            ..Default::default()
        };
        assert_eq!(coolant_rate(0.0, &EnginePoint::OFF, &e, &th, 0.0), 0.0);
        assert!(coolant_rate(30.0, &EnginePoint::OFF, &e, &th, 0.0) < 0.0);
    }

    #[test]
    fn coolant_warm_engine_hand_evaluation() {
        let e = EngineParams::default();
        let th = EngineThermalParams::default();
        let pt = e.ool.lookup(30e3).unwrap();
        // hand evaluation: Q_fuel = F(30 kW), α = 1 at 80 °C
        let q_fuel = 8000.0 + 2.4 * 30e3 + 6.5e-6 * 30e3 * 30e3;
        let expected = (q_fuel - 30e3 - 0.3 * q_fuel - 25.0 * 80.0 - 3000.0) / (120.0 * 850.0);
        assert_relative_eq!(
            coolant_rate(80.0, &pt, &e, &th, 0.0),
            expected,
            max_relative = 1e-12
        );
    }
}
