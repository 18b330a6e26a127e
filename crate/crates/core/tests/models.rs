mod common;

use common::oracle;
use iptm::models::{
    evaluate_step, fuel_rate, integrate_step, power_split, soc_rate, traction_power, BatteryParams,
    ControlInput, EngineParams, RoadLoadParams, VehicleParams, VehicleState, WarmupCorrection,
};
use proptest::prelude::*;

#[test]
fn rates_match_reference_values() {
    let worst = oracle::worst_rate_error();
    assert!(worst <= 1e-9, "worst relative error {worst:e}");
}

#[test]
fn partials_match_central_differences() {
    let worst = oracle::worst_gradient_error(100, 11);
    assert!(worst <= 1e-4, "worst relative error {worst:e}");
}

#[test]
fn cold_engine_burns_more() {
    let e = EngineParams::default();
    let pt = e.ool.lookup(20e3).unwrap();
    let warm = fuel_rate(&pt, 60.0, &e, 43e6);
    assert!((fuel_rate(&pt, 0.0, &e, 43e6) / warm - (1.0 + 0.3 * 60.0 / 70.0)).abs() < 1e-12);
    assert_eq!(fuel_rate(&pt, 80.0, &e, 43e6), warm);
}

fn params() -> VehicleParams {
    VehicleParams::default()
}

proptest! {
    #[test]
    fn power_balance_closes(p_trac in -60e3..80e3f64, p_bat in -25e3..25e3f64, aux in 0.0..2e3f64) {
        if let Ok(f) = power_split(p_trac, p_bat, aux, 60e3) {
            prop_assert!(f.p_eng >= 0.0 && f.p_brake <= 0.0);
            prop_assert!((f.p_eng + (p_bat - aux) + f.p_brake - p_trac).abs() <= 1e-9 * p_trac.abs().max(1.0));
        } else {
            prop_assert!(p_trac - (p_bat - aux) > 60e3);
        }
    }

    #[test]
    fn step_kinematics_conserve_kinetic_energy(v0 in 0.0..20.0f64, v1 in 0.0..20.0f64, d in 0.1..20.0f64) {
        let p = RoadLoadParams { rolling_coeff: 0.0, drag_area_coeff: 0.0, ..Default::default() };
        let work = traction_power(0.5 * (v0 + v1), (v1 - v0) / d, &p) * d;
        let kinetic = 0.5 * p.mass * (v1 * v1 - v0 * v0);
        prop_assert!((work - kinetic).abs() <= 1e-9 * kinetic.abs().max(1.0));
    }

    #[test]
    fn soc_rate_falls_with_battery_power(p in -25e3..25e3f64, dp in 1.0..5e3f64) {
        let b = BatteryParams::default();
        prop_assert!(soc_rate(0.6, p + dp, &b).unwrap() < soc_rate(0.6, p, &b).unwrap());
    }

    #[test]
    fn warmup_factor_is_bounded_and_monotone(t in -60.0..120.0f64, dt in 0.0..30.0f64) {
        let w = WarmupCorrection::default();
        let (a, _) = w.eval(t);
        prop_assert!((1.0..=1.3).contains(&a));
        prop_assert!(w.eval(t + dt).0 <= a);
    }

    #[test]
    fn temperatures_never_drop_below_ambient(
        soc in 0.4..0.8f64,
        t_cl in 0.0..95.0f64,
        t_cat in 0.0..800.0f64,
        v in 0.0..16.0f64,
        p_bat in -25e3..25e3f64,
        dt in 0.1..10.0f64,
    ) {
        let p = params();
        let s = VehicleState { soc, t_cl, t_cat, engine_on: false };
        if let Ok(f) = evaluate_step(&s, p_bat, v, 0.0, &p) {
            let u = ControlInput { p_bat, engine_on: f.engine_on };
            let n = integrate_step(&s, &u, v, 0.0, dt, &p).unwrap();
            prop_assert!(n.t_cl >= p.t_amb() && n.t_cat >= p.t_amb());
            prop_assert!((n.soc - (soc + dt * f.soc_rate)).abs() <= 1e-15);
            if !f.engine_on {
                prop_assert_eq!(f.fuel_rate, 0.0);
            }
        }
    }
}
