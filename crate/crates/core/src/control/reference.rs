//! Dynamic-programming benchmark of the power split over a known speed
//! trace, built directly on the plant integrator.

use crate::models::{integrate_step, traction_power, ControlInput, VehicleParams, VehicleState};
use crate::solver::DpProblem;

use super::ocp::OcpBounds;

/// Fixed-step power-split problem with the engine power as the control.
#[derive(Debug, Clone)]
pub struct SplitDp<'a> {
    params: &'a VehicleParams,
    /// Mean speed and acceleration per stage
    kinematics: Vec<(f64, f64)>,
    dt: f64,
    engine_levels: Vec<f64>,
    bounds: OcpBounds,
    soc_reference: f64,
    light_off: bool,
}

impl<'a> SplitDp<'a> {
    /// `speeds` holds the speed at every stage boundary, so a trace of `N`
    /// stages has `N + 1` entries.
    pub fn new(
        params: &'a VehicleParams,
        speeds: &[f64],
        dt: f64,
        engine_levels: Vec<f64>,
        bounds: OcpBounds,
        soc_reference: f64,
        light_off: bool,
    ) -> Self {
        let kinematics = speeds
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1]), (w[1] - w[0]) / dt))
            .collect();
        Self {
            params,
            kinematics,
            dt,
            engine_levels,
            bounds,
            soc_reference,
            light_off,
        }
    }

    /// Engine levels evenly spaced from zero to the engine's rated power.
    pub fn uniform_levels(params: &VehicleParams, count: usize) -> Vec<f64> {
        let p_max = params.p_eng_max();
        (0..count)
            .map(|i| p_max * i as f64 / (count - 1) as f64)
            .collect()
    }

    /// Battery power for engine level `p_eng`, or `None` if the battery
    /// cannot take the remainder.
    fn battery_power(&self, stage: usize, p_eng: f64) -> Option<(f64, bool)> {
        let (v, a) = self.kinematics[stage];
        let b = &self.params.battery;
        let demand = traction_power(v, a, &self.params.road_load) + self.params.aux_load();
        let on = self.params.engine.is_on(p_eng);
        let p_bat = demand - if on { p_eng } else { 0.0 };
        if p_bat > b.p_max {
            return None;
        }
        if p_bat < b.p_min {
            // surplus braking goes to the friction brakes, never engine output
            return (!on).then_some((b.p_min, false));
        }
        Some((p_bat, on))
    }

    fn admissible(&self, s: &VehicleState) -> bool {
        let b = &self.bounds;
        s.soc >= b.soc.0
            && s.soc <= b.soc.1
            && s.t_cl >= b.t_cl.0
            && s.t_cl <= b.t_cl.1
            && (!self.light_off || s.t_cat >= b.t_cat_min)
    }
}

impl DpProblem for SplitDp<'_> {
    fn stages(&self) -> usize {
        self.kinematics.len()
    }

    fn num_controls(&self) -> usize {
        self.engine_levels.len()
    }

    fn step(&self, stage: usize, state: &[f64], control: usize, next: &mut [f64]) -> Option<f64> {
        let (p_bat, engine_on) = self.battery_power(stage, self.engine_levels[control])?;
        let (v, a) = self.kinematics[stage];
        let s = VehicleState {
            soc: state[0],
            t_cl: state[1],
            t_cat: state[2],
            engine_on: false,
        };
        let u = ControlInput { p_bat, engine_on };
        let fuel = crate::models::evaluate_step(&s, p_bat, v, a, self.params)
            .ok()?
            .fuel_rate
            * self.dt;
        let n = integrate_step(&s, &u, v, a, self.dt, self.params).ok()?;
        if !self.admissible(&n) {
            return None;
        }
        next.copy_from_slice(&[n.soc, n.t_cl, n.t_cat]);
        Some(fuel)
    }

    fn terminal_cost(&self, state: &[f64]) -> Option<f64> {
        let (lo, hi) = self.bounds.terminal_band;
        let r = state[0] / self.soc_reference;
        (lo..=hi).contains(&r).then_some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{dp_oracle, StateGrid};

    fn grid() -> StateGrid {
        StateGrid::new(vec![
            StateGrid::linspace(0.55, 0.65, 11),
            StateGrid::linspace(40.0, 90.0, 51),
            StateGrid::linspace(0.0, 700.0, 8),
        ])
        .unwrap()
    }

    #[test]
    fn standstill_needs_no_fuel() {
        let mut p = VehicleParams::default();
        p.road_load.aux_electric_load = 0.0;
        p.engine_thermal.heating_enabled = false;
        let bounds = OcpBounds {
            terminal_band: (0.9, 1.1),
            ..OcpBounds::default()
        };
        let dp = SplitDp::new(
            &p,
            &[0.0; 4],
            10.0,
            SplitDp::uniform_levels(&p, 5),
            bounds,
            0.6,
            false,
        );
        let sol = dp_oracle(&dp, grid()).unwrap();
        let x0 = [0.6, 60.0, 360.0];
        assert_eq!(sol.optimal_cost(&dp, &x0), 0.0);
        let (cost, controls) = sol.rollout(&dp, &x0).unwrap();
        assert_eq!(cost, 0.0);
        assert!(controls.iter().all(|&c| c == 0));
    }

    #[test]
    fn regen_beyond_battery_limit_goes_to_brakes() {
        let p = VehicleParams::default();
        let dp = SplitDp::new(
            &p,
            &[30.0, 0.0],
            1.0,
            vec![0.0, 3e3],
            OcpBounds::default(),
            0.6,
            false,
        );
        assert_eq!(dp.battery_power(0, 0.0), Some((p.battery.p_min, false)));
        assert_eq!(dp.battery_power(0, 3e3), None);
    }
}
