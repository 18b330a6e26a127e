//! Reference values for the model rate functions, computed offline in
//! 50-digit decimal arithmetic from the closed-form expressions with the
//! default parameters (ambient 0 °C), plus the checks built on them.

#![allow(dead_code, clippy::excessive_precision)]

use iptm::models::{
    catalyst_branches, coolant_rate_partials, soc_rate_partials, BatteryParams, CatalystParams,
    EngineParams, EnginePoint, EngineThermalParams, OpenCircuitVoltage,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (soc, p_bat W, dSOC/dt 1/s) with a constant 200 V source.
pub const SOC_POINTS: [(f64, f64, f64); 20] = [
    (0.6, -25000.0, 5.04418755341430949e-03),
    (0.6, -18000.5, 3.68719446812514366e-03),
    (0.6, -12000.0, 2.49147540281351425e-03),
    (0.6, -7500.25, 1.57364415695472387e-03),
    (0.6, -3000.0, 6.36288739710339575e-04),
    (0.6, -500.0, 1.06704392656883232e-04),
    (0.6, -1.0, 2.13674679489850416e-07),
    (0.6, 1.0, -2.13675747865918813e-07),
    (0.6, 250.0, -5.34522319697031736e-05),
    (0.6, 1000.0, -2.14212089460685687e-04),
    (0.6, 4321.5, -9.33595154882102107e-04),
    (0.6, 9000.0, -1.96841019585702361e-03),
    (0.6, 15000.0, -3.33528009703894322e-03),
    (0.6, 21000.0, -4.75130590890773981e-03),
    (0.6, 25000.0, -5.72541009468210873e-03),
    (0.45, 50000.0, -1.25168042227971135e-02),
    (0.5, 99999.0, -4.25999026640953710e-02),
    (0.75, -40000.0, 7.82974173589415408e-03),
    (0.4, 12345.678, -2.72483465415761412e-03),
    (0.8, -2500.5, 5.30995978068786586e-04),
];

/// (T_cl °C, p_eng W, heating, dT_cl/dt °C/s)
pub const COOLANT_POINTS: [(f64, f64, bool, f64); 20] = [
    (50.0, 0.0, true, -4.16666666666666644e-02),
    (50.0, 100.0, true, -4.16666666666666644e-02),
    (50.0, 100.5, true, 1.63296463302573525e-02),
    (20.0, 5000.0, true, 7.87573529411764728e-02),
    (-5.0, 12000.0, true, 1.85281568627450988e-01),
    (-20.0, 30000.0, true, 4.47289215686274499e-01),
    (40.0, 60000.0, true, 6.79450980392156900e-01),
    (59.9, 25000.5, true, 2.05571793234195943e-01),
    (60.0, 25000.5, true, 2.05335330893504892e-01),
    (75.0, 45000.0, true, 3.97438725490196099e-01),
    (90.0, 1000.0, true, 1.01426470588235288e-02),
    (90.0, 0.0, true, -5.14705882352941152e-02),
    (0.0, 0.0, true, -2.94117647058823525e-02),
    (33.3, 17500.0, true, 1.88484181985294125e-01),
    (85.0, 58000.0, true, 5.41384313725490229e-01),
    (45.0, 3000.0, false, 7.10057107843137247e-02),
    (45.0, 0.0, false, -1.10294117647058831e-02),
    (10.0, 40000.0, false, 5.58725490196078423e-01),
    (65.5, 8000.25, false, 9.50381196106311332e-02),
    (-10.0, 20000.0, true, 2.99764705882352933e-01),
];

/// (T_cat °C, v m/s, ω rad/s, τ N·m, engine on, dT_cat/dt °C/s)
pub const CATALYST_POINTS: [(f64, f64, f64, f64, bool, f64); 20] = [
    (250.0, 0.0, 0.0, 0.0, false, -4.50000000000000011e-01),
    (0.0, 0.0, 0.0, 0.0, false, -2.00000000000000011e-01),
    (600.0, 15.0, 0.0, 0.0, false, -8.00000000000000044e-01),
    (123.4, 7.5, 0.0, 0.0, false, -3.23400000000000021e-01),
    (250.0, 0.0, 110.0, 45.45, true, 3.62307018439999995e+00),
    (250.0, 10.0, 200.0, 100.0, true, 6.51648624999999981e+00),
    (300.0, 10.0, 200.0, 100.0, true, 5.71230949999999993e+00),
    (400.0, 15.6, 300.0, 200.0, true, 1.81994141599999999e+01),
    (500.0, 5.0, 150.0, 100.0, true, 7.43071249999999961e-01),
    (180.0, 12.0, 130.0, 76.9, true, 5.23270637460000021e+00),
    (700.0, 0.0, 250.0, 160.0, true, 4.95314999999999994e+00),
    (20.0, 3.0, 110.0, 10.0, true, 6.79654469000000017e+00),
    (350.5, 8.25, 210.0, 142.857, true, 6.72753105485894043e+00),
    (275.0, 14.0, 280.0, 178.5, true, 1.60026018050000012e+01),
    (260.0, 0.5, 170.0, 117.6, true, 5.50969442259999997e+00),
    (450.0, 11.0, 190.0, 131.6, true, 3.64153135659999982e+00),
    (320.0, 2.0, 120.0, 60.0, true, 2.71417336000000020e+00),
    (90.0, 6.0, 140.0, 90.0, true, 6.98335691000000036e+00),
    (800.0, 15.0, 300.0, 200.0, true, 1.17627380000000006e+01),
    (249.99, 9.99, 160.0, 110.0, true, 5.18386711891464991e+00),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Largest relative error of the three rate functions over the fixed points.
pub fn worst_rate_error() -> f64 {
    let b = BatteryParams::default();
    let e = EngineParams::default();
    let c = CatalystParams::default();
    let mut worst: f64 = 0.0;
    for (soc, p, want) in SOC_POINTS {
        worst = worst.max(rel(soc_rate_partials(soc, p, &b).unwrap().value, want));
    }
    for (t, p, heating, want) in COOLANT_POINTS {
        let th = EngineThermalParams {
            heating_enabled: heating,
            ..Default::default()
        };
        worst = worst.max(rel(
            coolant_rate_partials(t, p, &e, &th, c.t_amb).value,
            want,
        ));
    }
    for (t, v, omega_e, tau_e, on, want) in CATALYST_POINTS {
        let pt = EnginePoint {
            omega_e,
            tau_e,
            p_eng: omega_e * tau_e,
        };
        let r = catalyst_branches(t, v, &pt, &c);
        worst = worst.max(rel(if on { r.on } else { r.off }, want));
    }
    worst
}

fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn grad_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / fd.abs().max(1e-8)
}

/// Largest relative gap between the analytic partials and central
/// differences over `n` random points, away from the warm-up kinks and the
/// engine on threshold.
pub fn worst_gradient_error(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = BatteryParams {
        open_circuit_voltage: OpenCircuitVoltage::Table {
            soc: vec![0.0, 0.5, 1.0],
            volts: vec![180.0, 200.0, 225.0],
        },
        ..Default::default()
    };
    let e = EngineParams::default();
    let th = EngineThermalParams::default();
    let c = CatalystParams::default();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let soc = loop {
            let s: f64 = rng.gen_range(0.3..0.9);
            if (s - 0.5).abs() > 1e-3 {
                break s;
            }
        };
        let p_bat = rng.gen_range(-25e3..25e3);
        let r = soc_rate_partials(soc, p_bat, &b).unwrap();
        worst = worst.max(grad_err(
            r.d_p_bat,
            central(|p| soc_rate_partials(soc, p, &b).unwrap().value, p_bat),
        ));
        worst = worst.max(grad_err(
            r.d_soc,
            central(|s| soc_rate_partials(s, p_bat, &b).unwrap().value, soc),
        ));

        let t_cl = loop {
            let t: f64 = rng.gen_range(-30.0..95.0);
            if (t - 60.0).abs() > 1e-3 && (t + 10.0).abs() > 1e-3 {
                break t;
            }
        };
        let p_eng = rng.gen_range(1e3..60e3);
        let r = coolant_rate_partials(t_cl, p_eng, &e, &th, c.t_amb);
        let f_t = |t| coolant_rate_partials(t, p_eng, &e, &th, c.t_amb).value;
        let f_p = |p| coolant_rate_partials(t_cl, p, &e, &th, c.t_amb).value;
        worst = worst.max(grad_err(r.d_t_cl, central(f_t, t_cl)));
        worst = worst.max(grad_err(r.d_p_eng, central(f_p, p_eng)));

        let t_cat = rng.gen_range(0.0..800.0);
        let v = rng.gen_range(0.0..16.0);
        let pt = EnginePoint {
            omega_e: rng.gen_range(100.0..300.0),
            tau_e: rng.gen_range(10.0..200.0),
            p_eng: 0.0,
        };
        let r = catalyst_branches(t_cat, v, &pt, &c);
        let on = |t: f64, w: f64, tau: f64| {
            let q = EnginePoint {
                omega_e: w,
                tau_e: tau,
                p_eng: 0.0,
            };
            catalyst_branches(t, v, &q, &c).on
        };
        worst = worst.max(grad_err(
            r.d_on_t_cat,
            central(|t| on(t, pt.omega_e, pt.tau_e), t_cat),
        ));
        worst = worst.max(grad_err(
            r.d_on_omega,
            central(|w| on(t_cat, w, pt.tau_e), pt.omega_e),
        ));
        worst = worst.max(grad_err(
            r.d_on_tau,
            central(|tau| on(t_cat, pt.omega_e, tau), pt.tau_e),
        ));
        worst = worst.max(grad_err(
            r.d_off_t_cat,
            central(|t| catalyst_branches(t, v, &pt, &c).off, t_cat),
        ));
    }
    worst
}
