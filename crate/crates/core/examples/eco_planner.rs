//! Plans a green-window trajectory through the default corridor and prints
//! each crossing with the signal phase it lands in.
//!
//! cargo run --example eco_planner -- [depart_s]

use iptm::preview::{plan_eco_trajectory, CorridorConfig};

fn main() -> iptm::Result<()> {
    let depart: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.0);
    let corridor = CorridorConfig::default();
    let plan = plan_eco_trajectory(&corridor, depart, 1800.0)?;
    for (s, &t) in corridor.intersections.iter().zip(&plan.crossings) {
        println!(
            "signal at {:6.0} m: crossed at {t:7.1} s, {:5.1} s into a {:.0} s green",
            s.position,
            s.phase(t),
            s.green_duration
        );
    }
    let speeds: Vec<f64> = plan.trace.samples().iter().map(|s| s.v).collect();
    let top = speeds.iter().copied().fold(0.0, f64::max);
    println!(
        "{} phases, arrives at {:.1} s, top speed {top:.2} m/s",
        plan.phases.len(),
        plan.trace.end_time()
    );
    Ok(())
}
