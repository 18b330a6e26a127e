//! Classifies generated trips by arrival phase at the first signal and
//! prints the per-bin mean speed profiles at a few sample times.
//!
//! cargo run --release --example bin_profiles

use iptm::preview::{aggregate_bins, classify_trip, generate_corridor_traffic, CorridorConfig};

fn main() -> iptm::Result<()> {
    let corridor = CorridorConfig::default();
    let traces = generate_corridor_traffic(&corridor, 200, 7)?;
    let bins = traces
        .iter()
        .map(|t| classify_trip(t, &corridor))
        .collect::<iptm::Result<Vec<_>>>()?;
    let horizon = traces.iter().map(|t| t.duration()).fold(0.0, f64::max) + 60.0;
    let profiles = aggregate_bins(&traces, &bins, corridor.bin_count, 1.0, horizon)?;
    print!("bin  trips");
    let taus = [0.0, 30.0, 60.0, 120.0, 240.0, 360.0];
    for tau in taus {
        print!("  v@{tau:<4}");
    }
    println!();
    for p in &profiles {
        print!("{:3}  {:5}", p.bin_index, p.support_count);
        for tau in taus {
            if p.usable() {
                print!("  {:6.2}", p.speed_at(tau));
            } else {
                print!("  {:>6}", "-");
            }
        }
        println!();
    }
    Ok(())
}
