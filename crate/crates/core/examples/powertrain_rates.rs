//! Tabulates fuel use and the three state rates along the engine operating
//! line, cold and warm.
//!
//! cargo run --example powertrain_rates

use iptm::models::{evaluate_step, VehicleParams, VehicleState};

fn main() -> iptm::Result<()> {
    let p = VehicleParams::default();
    println!("t_cl  p_eng_kW  omega   fuel_g/s  dsoc/dt     dT_cl/dt  dT_cat/dt");
    for t_cl in [10.0, 60.0] {
        let s = VehicleState {
            soc: 0.6,
            t_cl,
            t_cat: 300.0,
            engine_on: false,
        };
        // cruising at 15 m/s while the battery covers a share of the load
        for p_bat in [4e3, 0.0, -8e3, -20e3] {
            let f = evaluate_step(&s, p_bat, 15.0, 0.0, &p)?;
            println!(
                "{t_cl:4.0}  {:8.2}  {:5.1}  {:8.4}  {:+.3e}  {:+8.4}  {:+9.3}",
                f.p_eng / 1e3,
                f.point.omega_e,
                f.fuel_rate * 1e3,
                f.soc_rate,
                f.t_cl_rate,
                f.t_cat_rate
            );
        }
    }
    Ok(())
}
