//! Generates corridor traffic and summarizes trip times and stops.
//!
//! cargo run --example corridor_traffic -- [vehicles] [seed]

use iptm::preview::{generate_corridor_traffic, CorridorConfig};

fn main() -> iptm::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let corridor = CorridorConfig::default();
    for s in &corridor.intersections {
        println!(
            "signal at {:6.0} m, green from {:3.0} s for {:.0} of {:.0} s",
            s.position, s.green_start, s.green_duration, s.cycle
        );
    }
    let traces = generate_corridor_traffic(&corridor, n, seed)?;
    println!("vehicle    depart    trip_s  stopped_s  mean_mps");
    for t in &traces {
        let samples = t.samples();
        let stopped = samples
            .windows(2)
            .filter(|w| w[0].v < 0.1)
            .map(|w| w[1].t - w[0].t)
            .sum::<f64>();
        let dist = samples.last().unwrap().x - samples[0].x;
        println!(
            "{}  {:7.1}  {:7.1}  {:8.1}  {:8.2}",
            t.vehicle_id,
            t.start_time(),
            t.duration(),
            stopped,
            dist / t.duration()
        );
    }
    Ok(())
}
