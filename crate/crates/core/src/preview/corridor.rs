//! Signalized corridor layout and fixed-time signal algebra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::eco::EcoParams;
use super::traffic::TrafficParams;

/// Fixed-time signal at a stop line.
///
/// Green is `[green_start + k·cycle, green_start + k·cycle + green_duration)`
/// for every integer `k`; red fills the rest of the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    /// Stop-line position along the route (m)
    pub position: f64,
    /// s
    pub cycle: f64,
    /// Start of a reference green interval (s)
    pub green_start: f64,
    /// s
    pub green_duration: f64,
}

impl Intersection {
    /// Time since the last green onset, in `[0, cycle)`.
    pub fn phase(&self, t: f64) -> f64 {
        (t - self.green_start).rem_euclid(self.cycle)
    }

    pub fn is_green(&self, t: f64) -> bool {
        self.phase(t) < self.green_duration
    }

    /// A reference instant at which the signal turns red.
    pub fn red_onset(&self) -> f64 {
        self.green_start + self.green_duration
    }

    /// Index of the cycle holding `t`, counted from the reference green.
    pub fn cycle_index(&self, t: f64) -> i64 {
        ((t - self.green_start) / self.cycle).floor() as i64
    }

    /// Green interval `k` (in cycle counts from the reference green).
    pub fn green_window(&self, k: i64) -> (f64, f64) {
        let start = self.green_start + k as f64 * self.cycle;
        (start, start + self.green_duration)
    }

    /// The green interval containing `t`, or the next one after it.
    pub fn current_or_next_green(&self, t: f64) -> (f64, f64) {
        let k = self.cycle_index(t);
        let (s, e) = self.green_window(k);
        if t < e {
            (s, e)
        } else {
            self.green_window(k + 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorridorConfig {
    pub intersections: Vec<Intersection>,
    /// m/s
    pub speed_limit: f64,
    /// Route length; vehicles stop at its end (m)
    pub length: f64,
    /// Number of arrival-phase bins per cycle
    pub bin_count: usize,
    pub traffic: TrafficParams,
    pub eco: EcoParams,
}

impl Default for CorridorConfig {
    fn default() -> Self {
        let positions = [150.0, 700.0, 1300.0, 1900.0, 2500.0, 3100.0];
        let offsets = [0.0, 55.0, 10.0, 65.0, 25.0, 80.0];
        Self {
            intersections: positions
                .iter()
                .zip(offsets)
                .map(|(&position, green_start)| Intersection {
                    position,
                    cycle: 100.0,
                    green_start,
                    green_duration: 55.0,
                })
                .collect(),
            speed_limit: 15.6,
            length: 3500.0,
            bin_count: 10,
            traffic: TrafficParams::default(),
            eco: EcoParams::default(),
        }
    }
}

impl CorridorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleCorridor(msg));
        if self.intersections.is_empty() {
            return bad("corridor needs at least one intersection".into());
        }
        if !(self.speed_limit > 0.0) || !(self.length > 0.0) {
            return bad("speed_limit and length must be positive".into());
        }
        if self.bin_count == 0 {
            return bad("bin_count must be positive".into());
        }
        self.traffic.validate()?;
        self.eco.validate()?;
        let cycle = self.intersections[0].cycle;
        // room to brake from the speed limit, plus the stop offset
        let braking = self.speed_limit * self.speed_limit / (2.0 * self.traffic.decel_min) + 2.0;
        let mut prev = 0.0;
        for (i, s) in self.intersections.iter().enumerate() {
            if !(s.cycle > 0.0) || s.cycle != cycle {
                return bad(format!(
                    "intersection {i}: all signals share one positive cycle length"
                ));
            }
            if !(s.green_duration > 0.0 && s.green_duration < s.cycle) {
                return bad(format!(
                    "intersection {i}: green duration must lie in (0, cycle)"
                ));
            }
            if s.position <= prev && i > 0 {
                return bad(format!("intersection {i}: positions must increase"));
            }
            if s.position - prev < braking {
                return bad(format!(
                    "intersection {i} at {} m overlaps the braking zone of the previous one ({braking:.1} m needed)",
                    s.position
                ));
            }
            prev = s.position;
        }
        if self.length - prev < braking {
            return bad(format!(
                "route end at {} m leaves no room to stop after the last signal",
                self.length
            ));
        }
        Ok(())
    }

    pub fn cycle(&self) -> f64 {
        self.intersections[0].cycle
    }

    pub fn first(&self) -> &Intersection {
        &self.intersections[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Intersection {
        Intersection {
            position: 100.0,
            cycle: 100.0,
            green_start: 10.0,
            green_duration: 40.0,
        }
    }

    #[test]
    fn green_and_red_phases() {
        let s = sig();
        assert!(s.is_green(10.0));
        assert!(s.is_green(49.9));
        assert!(!s.is_green(50.0));
        assert!(!s.is_green(9.9));
        assert!(s.is_green(-80.0));
        assert_eq!(s.red_onset(), 50.0);
    }

    #[test]
    fn next_green_window() {
        let s = sig();
        assert_eq!(s.current_or_next_green(20.0), (10.0, 50.0));
        assert_eq!(s.current_or_next_green(60.0), (110.0, 150.0));
        assert_eq!(s.current_or_next_green(5.0), (10.0, 50.0));
    }

    #[test]
    fn default_corridor_is_valid_and_overlap_rejected() {
        let mut c = CorridorConfig::default();
        c.validate().unwrap();
        c.intersections[1].position = 200.0;
        assert!(matches!(c.validate(), Err(Error::InfeasibleCorridor(_))));
    }
}
