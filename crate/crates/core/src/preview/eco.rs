//! Green-window eco-trajectory planner.
//!
//! The route is planned one signal at a time. Between signals the vehicle
//! ramps at a constant rate to a cruise speed and holds it. Cruising at the
//! preferred speed is kept whenever it reaches the stop line inside a green
//! interval; otherwise the planner picks the highest cruise speed that arrives
//! just after the next usable green onset, so the vehicle glides into the
//! green instead of stopping. After the last signal it drives on and brakes to
//! rest at the route end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::corridor::CorridorConfig;
use super::trace::{DriveTrace, TraceSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EcoParams {
    /// Preferred cruise speed (m/s); `None` means the speed limit.
    pub cruise_speed: Option<f64>,
    /// Acceleration used for speed-ups and the launch (m/s²)
    pub accel: f64,
    /// Candidate deceleration rates for slowing into a green (m/s²)
    pub decel_rates: Vec<f64>,
    /// Braking rate at the route end (m/s²)
    pub final_decel: f64,
    /// Lowest cruise speed the planner may pick (m/s)
    pub min_speed: f64,
    /// Clearance kept from both ends of a green interval (s)
    pub green_margin: f64,
    /// Number of signal cycles searched for a usable green
    pub max_cycles: usize,
    /// Spacing of the emitted trace (s)
    pub sample_dt: f64,
}

impl Default for EcoParams {
    fn default() -> Self {
        Self {
            cruise_speed: None,
            accel: 1.0,
            decel_rates: vec![0.5, 1.0, 1.5],
            final_decel: 1.0,
            min_speed: 2.0,
            green_margin: 1.0,
            max_cycles: 5,
            sample_dt: 1.0,
        }
    }
}

impl EcoParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.accel > 0.0
            && self.accel <= 2.0
            && !self.decel_rates.is_empty()
            && self.decel_rates.iter().all(|&r| r > 0.0 && r <= 2.0)
            && self.final_decel > 0.0
            && self.min_speed > 0.0
            && self.green_margin >= 0.0
            && self.max_cycles >= 1
            && self.sample_dt > 0.0
            && self.cruise_speed.is_none_or(|v| v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "corridor.eco parameters out of range".into(),
            ))
        }
    }
}

/// Constant-acceleration piece of a planned trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub t0: f64,
    pub x0: f64,
    pub v0: f64,
    pub accel: f64,
    pub duration: f64,
}

impl Phase {
    fn end(&self) -> (f64, f64, f64) {
        let d = self.duration;
        (
            self.t0 + d,
            self.x0 + self.v0 * d + 0.5 * self.accel * d * d,
            self.v0 + self.accel * d,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcoPlan {
    pub phases: Vec<Phase>,
    /// Time each stop line is crossed
    pub crossings: Vec<f64>,
    pub trace: DriveTrace,
}

impl EcoPlan {
    /// Exact time the plan first reaches position `x`.
    pub fn time_at_position(&self, x: f64) -> Option<f64> {
        for p in &self.phases {
            let (t1, x1, _) = p.end();
            if x1 >= x && x >= p.x0 {
                let d = x - p.x0;
                let h = if p.accel.abs() < 1e-12 {
                    if p.v0 > 0.0 {
                        d / p.v0
                    } else {
                        0.0
                    }
                } else {
                    let disc = (p.v0 * p.v0 + 2.0 * p.accel * d).max(0.0);
                    (disc.sqrt() - p.v0) / p.accel
                };
                return Some((p.t0 + h).min(t1));
            }
        }
        None
    }

    fn state_at(&self, t: f64) -> (f64, f64) {
        let p = self
            .phases
            .iter()
            .rev()
            .find(|p| p.t0 <= t)
            .unwrap_or(&self.phases[0]);
        let h = (t - p.t0).clamp(0.0, p.duration);
        (
            p.x0 + p.v0 * h + 0.5 * p.accel * h * h,
            (p.v0 + p.accel * h).max(0.0),
        )
    }
}

/// Time to cover `dist` when ramping from `v0` toward `vc` at `rate` and then
/// holding `vc`, with the speed reached at `dist`.
fn ramp_hold(v0: f64, vc: f64, rate: f64, dist: f64) -> (f64, f64) {
    if (vc - v0).abs() < 1e-12 {
        return (dist / vc, vc);
    }
    let s = if vc > v0 { rate } else { -rate };
    let ramp_t = (vc - v0).abs() / rate;
    let ramp_d = 0.5 * (v0 + vc) * ramp_t;
    if ramp_d >= dist {
        let disc = (v0 * v0 + 2.0 * s * dist).max(0.0);
        let t = (disc.sqrt() - v0) / s;
        (t, v0 + s * t)
    } else {
        (ramp_t + (dist - ramp_d) / vc, vc)
    }
}

fn ramp_hold_phases(
    t0: f64,
    x0: f64,
    v0: f64,
    vc: f64,
    rate: f64,
    dist: f64,
    out: &mut Vec<Phase>,
) -> (f64, f64) {
    let (total, v_end) = ramp_hold(v0, vc, rate, dist);
    let s = if vc > v0 { rate } else { -rate };
    let ramp_t = if (vc - v0).abs() < 1e-12 {
        0.0
    } else {
        ((vc - v0).abs() / rate).min(total)
    };
    if ramp_t > 0.0 {
        out.push(Phase {
            t0,
            x0,
            v0,
            accel: s,
            duration: ramp_t,
        });
    }
    if total > ramp_t {
        let (t1, x1, v1) = match out.last() {
            Some(p) if ramp_t > 0.0 => p.end(),
            _ => (t0, x0, v0),
        };
        out.push(Phase {
            t0: t1,
            x0: x1,
            v0: v1,
            accel: 0.0,
            duration: total - ramp_t,
        });
    }
    (t0 + total, v_end)
}

/// Plans an eco trajectory departing from rest at `depart_t`; fails when no
/// green-window chain exists within the speed bounds or the trip would not
/// end within `horizon` seconds.
pub fn plan_eco_trajectory(cfg: &CorridorConfig, depart_t: f64, horizon: f64) -> Result<EcoPlan> {
    cfg.validate()?;
    let p = &cfg.eco;
    let v_pref = p
        .cruise_speed
        .unwrap_or(cfg.speed_limit)
        .min(cfg.speed_limit);
    if p.min_speed > v_pref {
        return Err(Error::InvalidParameter(
            "eco min_speed exceeds the cruise speed".into(),
        ));
    }
    let mut phases = Vec::new();
    let mut crossings = Vec::new();
    let (mut t, mut x, mut v) = (depart_t, 0.0, 0.0);
    for (i, sig) in cfg.intersections.iter().enumerate() {
        let dist = sig.position - x;
        let rate_for = |vc: f64, r: f64| if vc >= v { p.accel } else { r };
        let arrival = |vc: f64, r: f64| t + ramp_hold(v, vc, rate_for(vc, r), dist).0;
        let earliest = arrival(v_pref, p.accel);
        let mut choice: Option<(f64, f64)> = None;
        let k0 = sig.cycle_index(earliest) - 1;
        for k in k0..k0 + p.max_cycles as i64 + 1 {
            let (gs, ge) = sig.green_window(k);
            let (lo, hi) = (gs + p.green_margin, ge - p.green_margin);
            if hi < lo || hi < earliest {
                continue;
            }
            if earliest >= lo {
                choice = Some((v_pref, p.accel));
                break;
            }
            // slow down so the line is reached at `lo`
            let mut best: Option<(f64, f64)> = None;
            for &r in &p.decel_rates {
                if arrival(p.min_speed, r) < lo {
                    continue;
                }
                let (mut slow, mut fast) = (p.min_speed, v_pref);
                for _ in 0..80 {
                    let mid = 0.5 * (slow + fast);
                    if arrival(mid, r) >= lo {
                        slow = mid;
                    } else {
                        fast = mid;
                    }
                }
                if arrival(slow, r) <= hi && best.is_none_or(|(vb, _)| slow > vb + 1e-9) {
                    best = Some((slow, r));
                }
            }
            if best.is_some() {
                choice = best;
                break;
            }
            return Err(Error::NoGreenWindow(format!(
                "signal {i} at {} m: even {} m/s arrives before green at {gs} s",
                sig.position, p.min_speed
            )));
        }
        let (vc, r) = choice.ok_or_else(|| {
            Error::NoGreenWindow(format!(
                "signal {i} at {} m: no green within {} cycles",
                sig.position, p.max_cycles
            ))
        })?;
        let (t_c, v_c) = ramp_hold_phases(t, x, v, vc, rate_for(vc, r), dist, &mut phases);
        crossings.push(t_c);
        t = t_c;
        x = sig.position;
        v = v_c;
    }
    // run out to the route end and brake to rest
    let dist = cfg.length - x;
    let (a, b) = (p.accel, p.final_decel);
    let v_peak = v_pref.min(((2.0 * a * b * dist + b * v * v) / (a + b)).sqrt());
    if v * v / (2.0 * b) >= dist || v_peak <= v {
        let brake_d = v * v / (2.0 * b);
        if brake_d < dist {
            phases.push(Phase {
                t0: t,
                x0: x,
                v0: v,
                accel: 0.0,
                duration: (dist - brake_d) / v,
            });
            t += (dist - brake_d) / v;
            phases.push(Phase {
                t0: t,
                x0: cfg.length - brake_d,
                v0: v,
                accel: -b,
                duration: v / b,
            });
        } else {
            let rate = v * v / (2.0 * dist);
            phases.push(Phase {
                t0: t,
                x0: x,
                v0: v,
                accel: -rate,
                duration: v / rate,
            });
        }
    } else {
        let up_t = (v_peak - v) / a;
        let up_d = 0.5 * (v + v_peak) * up_t;
        let down_d = v_peak * v_peak / (2.0 * b);
        let hold = ((dist - up_d - down_d) / v_peak).max(0.0);
        phases.push(Phase {
            t0: t,
            x0: x,
            v0: v,
            accel: a,
            duration: up_t,
        });
        let (t1, x1, _) = phases.last().expect("pushed").end();
        phases.push(Phase {
            t0: t1,
            x0: x1,
            v0: v_peak,
            accel: 0.0,
            duration: hold,
        });
        phases.push(Phase {
            t0: t1 + hold,
            x0: x1 + v_peak * hold,
            v0: v_peak,
            accel: -b,
            duration: v_peak / b,
        });
    }
    let t_stop = phases.last().map(|p| p.end().0).unwrap_or(t);
    if t_stop - depart_t > horizon {
        return Err(Error::NoGreenWindow(format!(
            "planned trip lasts {:.1} s, beyond the {horizon} s horizon",
            t_stop - depart_t
        )));
    }
    let mut plan = EcoPlan {
        phases,
        crossings,
        trace: DriveTrace::from_speeds("eco", "eco", &[depart_t], &[0.0])?,
    };
    let n = ((t_stop - depart_t) / p.sample_dt).ceil() as usize;
    let samples = (0..=n)
        .map(|k| {
            let ts = depart_t + k as f64 * p.sample_dt;
            let (xs, vs) = if ts >= t_stop {
                (cfg.length, 0.0)
            } else {
                plan.state_at(ts)
            };
            TraceSample {
                t: ts,
                v: vs,
                x: xs,
            }
        })
        .collect();
    plan.trace = DriveTrace::new("corridor", "eco", samples)?;
    Ok(plan)
}
