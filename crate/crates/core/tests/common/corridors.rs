#![allow(dead_code)]

use iptm::preview::{CorridorConfig, Intersection};
use rand::Rng;

/// Valid corridor with 2 to 7 signals sharing one cycle, random spacing,
/// offsets, green splits and speed limit. Every signal sits far enough past
/// the previous one that a vehicle slowed to the eco minimum speed can sit
/// out a full red, so a green-window plan always exists.
pub fn random_corridor(rng: &mut impl Rng) -> CorridorConfig {
    let mut cfg = CorridorConfig::default();
    let cycle = rng.gen_range(60.0..130.0f64).round();
    cfg.speed_limit = rng.gen_range(10.0..20.0);
    let braking = cfg.speed_limit * cfg.speed_limit / (2.0 * cfg.traffic.decel_min) + 2.0;
    let n = rng.gen_range(2..=7);
    let mut x = 0.0;
    cfg.intersections = (0..n)
        .map(|_| {
            let green_duration = (cycle * rng.gen_range(0.35..0.65f64)).round();
            let red = cycle - green_duration + 2.0 * cfg.eco.green_margin;
            let gap = braking + cfg.eco.min_speed * red;
            x += rng.gen_range(gap + 20.0..gap + 800.0);
            Intersection {
                position: x.round(),
                cycle,
                green_start: rng.gen_range(0.0..cycle).round(),
                green_duration,
            }
        })
        .collect();
    cfg.length = (x + rng.gen_range(braking + 20.0..braking + 500.0)).round();
    cfg.validate().expect("generated corridor is valid");
    cfg
}
