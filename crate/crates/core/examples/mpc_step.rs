//! Solves one MPC step at a few battery and temperature states and prints
//! the chosen split with solver diagnostics.
//!
//! cargo run --release --example mpc_step

use iptm::control::{mpc_step, MpcConfig, RuleBasedConfig};
use iptm::models::{VehicleParams, VehicleState};
use iptm::preview::{
    build_preview, generate_corridor_traffic, BinProfile, CorridorConfig, PreviewMode,
};

fn main() -> iptm::Result<()> {
    let params = VehicleParams::default();
    let trip = generate_corridor_traffic(&CorridorConfig::default(), 1, 3)?.remove(0);
    let own = BinProfile::from_trace(&trip, 1.0);
    let t_now = trip.start_time() + 20.0;
    let preview = build_preview(
        t_now,
        &trip,
        &own,
        PreviewMode::Exact,
        5,
        1.0,
        10.0,
        trip.end_time(),
    )?;
    println!(
        "preview: {} fine + {} coarse steps to t = {:.0} s, speed now {:.2} m/s",
        preview.short.len(),
        preview.long.len(),
        preview.t_end,
        trip.speed_at(t_now)
    );
    for (soc, t_cl, t_cat) in [
        (0.6, 50.0, 250.0),
        (0.6, 80.0, 450.0),
        (0.5, 80.0, 450.0),
        (0.7, 80.0, 450.0),
    ] {
        let s = VehicleState {
            soc,
            t_cl,
            t_cat,
            engine_on: false,
        };
        let (d, _) = mpc_step(
            &s,
            &preview,
            None,
            &params,
            &MpcConfig::default(),
            &RuleBasedConfig::default(),
            0.6,
        )?;
        let diag = d.diagnostics.expect("MPC reports diagnostics");
        println!(
            "soc {soc:.2} T_cl {t_cl:3.0} T_cat {t_cat:3.0}: p_bat {:8.0} W, p_eng {:7.0} W, {:?} after {} iterations, {:.1} ms",
            d.p_bat,
            d.p_eng,
            diag.status,
            diag.iterations,
            diag.wall_time * 1e3
        );
    }
    Ok(())
}
