use iptm::control::{
    mpc_step, rule_based_step, transcribe_ocp, MpcConfig, OcpSpec, RuleBasedConfig,
};
use iptm::models::{power_split, VehicleParams, VehicleState};
use iptm::preview::{
    build_preview, generate_corridor_traffic, BinProfile, DriveTrace, PreviewMode,
};
use iptm::sim::{run_closed_loop, CaseLabel, SimConfig};
use iptm::solver::{finite_diff_gradient, Nlp};
use proptest::prelude::*;
use std::sync::OnceLock;

fn trip() -> &'static DriveTrace {
    static TRIP: OnceLock<DriveTrace> = OnceLock::new();
    TRIP.get_or_init(|| {
        generate_corridor_traffic(&SimConfig::default().corridor, 1, 3)
            .unwrap()
            .remove(0)
    })
}

fn state(soc: f64, t_cl: f64, t_cat: f64) -> VehicleState {
    VehicleState {
        soc,
        t_cl,
        t_cat,
        engine_on: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ocp_gradient_matches_finite_differences(
        soc in 0.45..0.75f64,
        t_cl in 42.0..88.0f64,
        t_cat in 200.0..600.0f64,
        offset in 0usize..200,
        fraction in prop::collection::vec(0.0..1.0f64, 64),
        weight in 0.0..2.0f64,
    ) {
        let p = VehicleParams::default();
        let trip = trip();
        let own = BinProfile::from_trace(trip, 1.0);
        let t_now = trip.start_time() + offset as f64;
        let pv = build_preview(t_now, trip, &own, PreviewMode::Exact, 5, 1.0, 10.0, t_now + 120.0).unwrap();
        let ocp = transcribe_ocp(OcpSpec::new(state(soc, t_cl, t_cat), pv, 0.6), &p).unwrap();
        let u: Vec<f64> = (0..ocp.dim())
            .map(|k| ocp.lower()[k] + fraction[k % fraction.len()] * (ocp.upper()[k] - ocp.lower()[k]))
            .collect();
        let w: Vec<f64> = (0..ocp.num_ineq()).map(|i| weight * ((i % 5) as f64 + 1.0)).collect();
        let merit = |x: &[f64]| {
            let mut g = vec![0.0; ocp.num_ineq()];
            ocp.evaluate(x, &mut g, &mut []) + g.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
        };
        let mut grad = vec![0.0; ocp.dim()];
        ocp.weighted_gradient(&u, &w, &[], &mut grad);
        let fd = finite_diff_gradient(merit, &u, 1e-6);
        for (a, b) in grad.iter().zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-4 * (1.0 + b.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn rule_based_balances_power(
        soc in 0.4..0.8f64,
        t_cl in 20.0..95.0f64,
        t_cat in 0.0..700.0f64,
        p_trac in -40e3..60e3f64,
    ) {
        let p = VehicleParams::default();
        let d = rule_based_step(&state(soc, t_cl, t_cat), p_trac, p.aux_load(), &RuleBasedConfig::default(), &p).unwrap();
        prop_assert!(d.p_bat >= p.battery.p_min && d.p_bat <= p.battery.p_max);
        let flows = power_split(p_trac, d.p_bat, p.aux_load(), p.p_eng_max()).unwrap();
        prop_assert_eq!(flows.p_eng, d.p_eng);
        prop_assert_eq!(d.engine_on, p.engine.is_on(d.p_eng));
    }
}

#[test]
fn mpc_first_move_respects_limits() {
    let p = VehicleParams::default();
    let trip = trip();
    let own = BinProfile::from_trace(trip, 1.0);
    for (k, (soc, t_cl, t_cat)) in [
        (0.45, 45.0, 260.0),
        (0.6, 60.0, 400.0),
        (0.75, 85.0, 600.0),
        (0.6, 50.0, 240.0),
    ]
    .into_iter()
    .enumerate()
    {
        let s = state(soc, t_cl, t_cat);
        let t_now = trip.start_time() + 30.0 * k as f64;
        let pv = build_preview(
            t_now,
            trip,
            &own,
            PreviewMode::Exact,
            5,
            1.0,
            10.0,
            trip.end_time(),
        )
        .unwrap();
        let (d, _) = mpc_step(
            &s,
            &pv,
            None,
            &p,
            &MpcConfig::default(),
            &RuleBasedConfig::default(),
            0.6,
        )
        .unwrap();
        assert!(
            d.p_bat >= p.battery.p_min - 1e-6 && d.p_bat <= p.battery.p_max + 1e-6,
            "{d:?}"
        );
        assert!(d.p_eng >= 0.0 && d.p_eng <= p.p_eng_max() + 1e-6, "{d:?}");
        assert!(d.diagnostics.is_some());
    }
}

#[test]
fn closed_loop_is_deterministic() {
    let cfg = SimConfig {
        scenario: SimConfig::default().scenario.with_case(CaseLabel::B),
        ..SimConfig::default()
    };
    let run = || {
        let mut log = run_closed_loop(&cfg, trip(), None).unwrap();
        for r in &mut log.records {
            r.wall_time = 0.0;
        }
        log
    };
    assert_eq!(run(), run());
}
