//! Benchmarks the closed-loop MPC against the dynamic-programming optimum
//! on a 300 s stretch of a generated corridor trip at 10 s resolution.
//!
//! cargo run --release --example dp_oracle -- [vehicle]

use iptm::control::SplitDp;
use iptm::preview::{generate_corridor_traffic, DriveTrace};
use iptm::sim::{run_closed_loop, CaseLabel, SimConfig};
use iptm::solver::{dp_oracle, StateGrid};

const STAGES: usize = 30;
const DT: f64 = 10.0;

fn main() -> iptm::Result<()> {
    let vehicle: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let mut cfg = SimConfig::default();
    let trip =
        generate_corridor_traffic(&cfg.corridor, vehicle + 1, cfg.scenario.seed)?.remove(vehicle);
    let t0 = trip.start_time();
    let times: Vec<f64> = (0..=STAGES).map(|k| k as f64 * DT).collect();
    let speeds: Vec<f64> = times.iter().map(|t| trip.speed_at(t0 + t)).collect();
    let trace = DriveTrace::from_speeds("dp", &trip.vehicle_id, &times, &speeds)?;

    let params = cfg.vehicle_params();
    let bounds = cfg.controller.mpc.bounds.clone();
    let dp = SplitDp::new(
        &params,
        &speeds,
        DT,
        SplitDp::uniform_levels(&params, 21),
        bounds,
        0.6,
        true,
    );
    let grid = StateGrid::new(vec![
        StateGrid::linspace(0.5, 0.7, 41),
        StateGrid::linspace(40.0, 90.0, 31),
        StateGrid::linspace(250.0, 700.0, 31),
    ])?;
    let start = std::time::Instant::now();
    let sol = dp_oracle(&dp, grid)?;
    let x0 = [0.6, 50.0, 250.0];
    let v0 = sol.optimal_cost(&dp, &x0);
    let rollout = sol.rollout(&dp, &x0).map(|r| r.0);
    println!(
        "DP optimum {v0:.6} kg (policy rollout {rollout:?}) in {:.1?}",
        start.elapsed()
    );

    cfg.scenario = cfg.scenario.with_case(CaseLabel::B);
    cfg.scenario.dt1 = DT;
    cfg.scenario.dt2 = DT;
    cfg.scenario.h_r = 1;
    let log = run_closed_loop(&cfg, &trace, None)?;
    let fuel = log.fuel_total();
    println!(
        "MPC {fuel:.6} kg, ratio to DP {:.4}, final {:?}",
        fuel / v0,
        log.final_state
    );
    Ok(())
}
