//! Kinematic corridor traffic: each vehicle drives alone, cruising near the
//! speed limit, braking for red signals and waiting for green.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::corridor::{CorridorConfig, Intersection};
use super::trace::{DriveTrace, TraceSample};

/// Distance between the resting position and the stop line (m).
pub const STOP_OFFSET: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficParams {
    /// Departures are whole seconds drawn from `[0, departure_window)`.
    pub departure_window: u32,
    /// Cruise speed as a fraction of the limit, drawn per vehicle.
    pub cruise_factor_min: f64,
    pub cruise_factor_max: f64,
    /// Acceleration drawn per vehicle (m/s²), at most 2.
    pub accel_min: f64,
    pub accel_max: f64,
    /// Braking deceleration drawn per vehicle (m/s²).
    pub decel_min: f64,
    pub decel_max: f64,
    /// Integration step (s); must divide `sample_dt`.
    pub dt_sim: f64,
    /// Spacing of the emitted samples (s).
    pub sample_dt: f64,
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            departure_window: 1000,
            cruise_factor_min: 0.85,
            cruise_factor_max: 1.0,
            accel_min: 1.2,
            accel_max: 2.0,
            decel_min: 1.2,
            decel_max: 1.8,
            dt_sim: 0.1,
            sample_dt: 1.0,
        }
    }
}

impl TrafficParams {
    pub fn validate(&self) -> Result<()> {
        let ordered = |lo: f64, hi: f64| lo > 0.0 && lo <= hi;
        if self.departure_window == 0
            || !ordered(self.cruise_factor_min, self.cruise_factor_max)
            || self.cruise_factor_max > 1.0
            || !ordered(self.accel_min, self.accel_max)
            || self.accel_max > 2.0
            || !ordered(self.decel_min, self.decel_max)
        {
            return Err(Error::InvalidParameter(
                "corridor.traffic ranges are inconsistent".into(),
            ));
        }
        if !(self.dt_sim > 0.0) || !(self.sample_dt >= self.dt_sim) || self.substeps().is_none() {
            return Err(Error::InvalidParameter(
                "corridor.traffic.dt_sim must divide sample_dt".into(),
            ));
        }
        Ok(())
    }

    fn substeps(&self) -> Option<usize> {
        let n = (self.sample_dt / self.dt_sim).round();
        ((n * self.dt_sim - self.sample_dt).abs() < 1e-9 && n >= 1.0).then_some(n as usize)
    }
}

/// One simulated driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Driver {
    pub departure: f64,
    pub cruise_speed: f64,
    pub accel: f64,
    pub decel: f64,
}

#[derive(Debug, Clone, Copy)]
struct Kin {
    t: f64,
    x: f64,
    v: f64,
}

/// Advances `k` by `dt` under constant acceleration `a`, stopping at zero speed.
fn kin_step(k: Kin, a: f64, dt: f64) -> Kin {
    let v_end = k.v + a * dt;
    if v_end >= 0.0 {
        Kin {
            t: k.t + dt,
            x: k.x + k.v * dt + 0.5 * a * dt * dt,
            v: v_end,
        }
    } else {
        let tau = -k.v / a;
        Kin {
            t: k.t + dt,
            x: k.x + 0.5 * k.v * tau,
            v: 0.0,
        }
    }
}

fn free_accel(d: &Driver, v: f64, dt: f64) -> f64 {
    if v < d.cruise_speed {
        d.accel.min((d.cruise_speed - v) / dt)
    } else {
        (-d.decel).max((d.cruise_speed - v) / dt)
    }
}

/// Whether driving freely from `k` crosses the stretch from 1 m before the
/// stop line to the line itself inside a single green interval.
fn free_crossing_is_green(k: Kin, d: &Driver, sig: &Intersection, dt: f64) -> bool {
    let mut cur = k;
    let mut t_near = if cur.x >= sig.position - 1.0 {
        Some(cur.t)
    } else {
        None
    };
    // bounded look-ahead: a vehicle from rest covers any signal spacing well within this
    for _ in 0..100_000 {
        let next = kin_step(cur, free_accel(d, cur.v, dt), dt);
        let cross = |target: f64| cur.t + dt * (target - cur.x) / (next.x - cur.x);
        if t_near.is_none() && next.x >= sig.position - 1.0 {
            t_near = Some(cross(sig.position - 1.0));
        }
        if next.x >= sig.position {
            let t_line = cross(sig.position);
            let t_near = t_near.expect("set before the line");
            return sig.is_green(t_near)
                && sig.is_green(t_line)
                && sig.cycle_index(t_near) == sig.cycle_index(t_line);
        }
        cur = next;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Free,
    Braking,
    Waiting,
}

/// Simulates one driver over the corridor, returning samples at `sample_dt`
/// from departure until the vehicle rests at the route end.
pub fn simulate_driver(cfg: &CorridorConfig, d: &Driver, vehicle_id: &str) -> Result<DriveTrace> {
    let p = &cfg.traffic;
    let dt = p.dt_sim;
    let substeps = p
        .substeps()
        .ok_or_else(|| Error::InvalidParameter("dt_sim must divide sample_dt".into()))?;
    let mut k = Kin {
        t: d.departure,
        x: 0.0,
        v: 0.0,
    };
    let mut next_signal = 0usize;
    let mut mode = Mode::Free;
    let mut final_stop = false;
    let mut samples = vec![TraceSample {
        t: d.departure,
        v: 0.0,
        x: 0.0,
    }];
    let max_steps = 200_000 * substeps;
    let mut finished = false;
    for step in 1..=max_steps {
        while next_signal < cfg.intersections.len()
            && k.x >= cfg.intersections[next_signal].position
        {
            next_signal += 1;
            mode = Mode::Free;
        }
        let sig = cfg.intersections.get(next_signal);
        let mut a = match (mode, sig) {
            (Mode::Waiting, Some(s)) => {
                if free_crossing_is_green(k, d, s, dt) {
                    mode = Mode::Free;
                    free_accel(d, k.v, dt)
                } else {
                    0.0
                }
            }
            (Mode::Braking, Some(s)) if free_crossing_is_green(k, d, s, dt) => {
                mode = Mode::Free;
                free_accel(d, k.v, dt)
            }
            _ => free_accel(d, k.v, dt),
        };
        if mode == Mode::Free {
            if let Some(s) = sig {
                let gap = s.position - STOP_OFFSET - k.x;
                if gap > 0.0
                    && k.v * k.v >= 2.0 * d.decel * gap
                    && !free_crossing_is_green(k, d, s, dt)
                {
                    mode = Mode::Braking;
                }
            }
        }
        if mode == Mode::Braking {
            let s = sig.expect("braking needs a signal");
            a = brake_to(k, s.position - STOP_OFFSET, dt);
        }
        if next_signal == cfg.intersections.len() {
            let gap = cfg.length - k.x;
            if final_stop || k.v * k.v >= 2.0 * d.decel * gap {
                final_stop = true;
                a = brake_to(k, cfg.length, dt);
            }
        }
        if mode == Mode::Waiting {
            a = 0.0;
        }
        let mut next = kin_step(k, a, dt);
        // exact time of this step from the integer step count
        next.t =
            d.departure + (step / substeps) as f64 * p.sample_dt + (step % substeps) as f64 * dt;
        if mode == Mode::Braking {
            let target = sig.expect("braking needs a signal").position - STOP_OFFSET;
            if next.v < 1e-3 || next.x >= target - 1e-3 {
                next.x = target;
                next.v = 0.0;
                mode = Mode::Waiting;
            }
        }
        if final_stop && (next.v < 1e-3 || next.x >= cfg.length - 1e-3) {
            next.x = cfg.length;
            next.v = 0.0;
            finished = true;
        }
        k = next;
        if finished {
            // pad to the next sample instant at rest
            let rem = step % substeps;
            let t_sample = if rem == 0 {
                k.t
            } else {
                d.departure + (step / substeps + 1) as f64 * p.sample_dt
            };
            samples.push(TraceSample {
                t: t_sample,
                v: 0.0,
                x: cfg.length,
            });
            break;
        }
        if step % substeps == 0 {
            samples.push(TraceSample {
                t: k.t,
                v: k.v,
                x: k.x,
            });
        }
    }
    if !finished {
        return Err(Error::InfeasibleCorridor(format!(
            "vehicle {vehicle_id} never reached the route end"
        )));
    }
    DriveTrace::new("corridor", vehicle_id, samples)
}

/// Deceleration that brings the vehicle to rest at `target`.
fn brake_to(k: Kin, target: f64, dt: f64) -> f64 {
    let gap = target - k.x;
    if gap <= 1e-6 {
        return -k.v / dt;
    }
    -(k.v * k.v) / (2.0 * gap)
}

/// Draws `n` drivers from the configured ranges.
pub fn draw_drivers(cfg: &CorridorConfig, n: usize, seed: u64) -> Vec<Driver> {
    let p = &cfg.traffic;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Driver {
            departure: rng.gen_range(0..p.departure_window) as f64,
            cruise_speed: cfg.speed_limit
                * rng.gen_range(p.cruise_factor_min..=p.cruise_factor_max),
            accel: rng.gen_range(p.accel_min..=p.accel_max),
            decel: rng.gen_range(p.decel_min..=p.decel_max),
        })
        .collect()
}

/// Generates `n_vehicles` independent kinematic traces over the corridor.
/// Traces are identical for identical configuration and seed.
pub fn generate_corridor_traffic(
    cfg: &CorridorConfig,
    n_vehicles: usize,
    seed: u64,
) -> Result<Vec<DriveTrace>> {
    if n_vehicles == 0 {
        return Err(Error::InvalidParameter(
            "n_vehicles must be at least 1".into(),
        ));
    }
    cfg.validate()?;
    draw_drivers(cfg, n_vehicles, seed)
        .iter()
        .enumerate()
        .map(|(i, d)| simulate_driver(cfg, d, &format!("veh_{i:04}")))
        .collect()
}
