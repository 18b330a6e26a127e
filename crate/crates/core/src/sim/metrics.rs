//! Trip summaries.

use serde::{Deserialize, Serialize};

use crate::control::OcpBounds;
use crate::solver::SolveStatus;

use super::closed_loop::TrajectoryLog;

/// Tolerances used when counting bound violations.
pub const SOC_TOL: f64 = 1e-6;
pub const TEMP_TOL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ViolationStat {
    pub count: usize,
    /// Largest excess beyond the bound (not beyond the tolerance)
    pub max: f64,
}

impl ViolationStat {
    fn record(&mut self, excess: f64, tol: f64) {
        if excess > tol {
            self.count += 1;
        }
        self.max = self.max.max(excess);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Violations {
    pub soc: ViolationStat,
    pub t_cl: ViolationStat,
    /// Counted once the catalyst has reached light-off
    pub t_cat: ViolationStat,
    pub terminal_soc: bool,
}

impl Violations {
    pub fn any(&self) -> bool {
        self.soc.count + self.t_cl.count + self.t_cat.count > 0 || self.terminal_soc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverStats {
    pub steps: usize,
    pub optimal: usize,
    pub max_iter: usize,
    pub fallback: usize,
    pub soft: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WallTimeStats {
    pub mean: f64,
    pub max: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripMetrics {
    /// kg
    pub fuel_total: f64,
    pub engine_on_ratio: f64,
    /// `soc_end / soc_init − 1`
    pub soc_terminal_dev: f64,
    pub trip_time: f64,
    pub violations: Violations,
    pub solver: SolverStats,
    /// Controller timing; the only field that varies between identical runs
    pub wall_time: WallTimeStats,
}

impl TripMetrics {
    /// Equality ignoring wall-clock timing.
    pub fn same_outcome(&self, other: &TripMetrics) -> bool {
        let strip = |m: &TripMetrics| TripMetrics {
            wall_time: WallTimeStats::default(),
            ..m.clone()
        };
        strip(self) == strip(other)
    }
}

pub fn compute_metrics(log: &TrajectoryLog, bounds: &OcpBounds) -> TripMetrics {
    let dt = log.dt;
    let trip_time = dt * log.records.len() as f64;
    let on_time: f64 = log.records.iter().filter(|r| r.engine_on).map(|_| dt).sum();
    let soc_init = log.initial.soc;
    let soc_end = log.final_state.soc;

    let mut v = Violations::default();
    let mut lit = false;
    for (soc, t_cl, t_cat) in log.states() {
        v.soc
            .record((soc - bounds.soc.1).max(bounds.soc.0 - soc), SOC_TOL);
        v.t_cl
            .record((t_cl - bounds.t_cl.1).max(bounds.t_cl.0 - t_cl), TEMP_TOL);
        lit |= t_cat >= bounds.t_cat_min;
        if lit {
            v.t_cat.record(bounds.t_cat_min - t_cat, TEMP_TOL);
        }
    }
    let (lo, hi) = bounds.terminal_band;
    v.terminal_soc = soc_end < lo * soc_init - SOC_TOL || soc_end > hi * soc_init + SOC_TOL;

    let mut solver = SolverStats::default();
    for r in &log.records {
        let Some(status) = r.status else { continue };
        solver.steps += 1;
        match status {
            SolveStatus::Optimal => solver.optimal += 1,
            SolveStatus::MaxIter | SolveStatus::Infeasible => solver.max_iter += 1,
            SolveStatus::Fallback => solver.fallback += 1,
        }
        solver.soft += usize::from(r.soft);
    }
    let times: Vec<f64> = log.records.iter().map(|r| r.wall_time).collect();
    let total: f64 = times.iter().sum();
    TripMetrics {
        fuel_total: log.fuel_total(),
        engine_on_ratio: if trip_time > 0.0 {
            on_time / trip_time
        } else {
            0.0
        },
        soc_terminal_dev: soc_end / soc_init - 1.0,
        trip_time,
        violations: v,
        solver,
        wall_time: WallTimeStats {
            mean: if times.is_empty() {
                0.0
            } else {
                total / times.len() as f64
            },
            max: times.iter().fold(0.0, |a, b| a.max(*b)),
            total,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::VehicleState;
    use crate::sim::closed_loop::StepRecord;

    fn log(on: &[bool], fuel: &[f64]) -> TrajectoryLog {
        let s = VehicleState {
            soc: 0.6,
            t_cl: 60.0,
            t_cat: 300.0,
            engine_on: false,
        };
        let mut cum = 0.0;
        let records = on
            .iter()
            .zip(fuel)
            .enumerate()
            .map(|(k, (&e, &f))| {
                cum += f;
                StepRecord {
                    t: k as f64,
                    v: 0.0,
                    p_trac: 0.0,
                    p_bat: 0.0,
                    p_eng: 0.0,
                    soc: 0.6,
                    t_cl: 60.0,
                    t_cat: 300.0,
                    engine_on: e,
                    fuel_cum: cum,
                    status: None,
                    iterations: 0,
                    soft: false,
                    wall_time: 0.0,
                }
            })
            .collect();
        TrajectoryLog {
            dt: 1.0,
            initial: s,
            records,
            final_state: s,
        }
    }

    #[test]
    fn engine_never_on() {
        let m = compute_metrics(&log(&[false; 4], &[0.0; 4]), &OcpBounds::default());
        assert_eq!(m.engine_on_ratio, 0.0);
        assert!(!m.violations.any());
    }

    #[test]
    fn engine_on_half_the_time() {
        let m = compute_metrics(
            &log(&[true, false, true, false], &[0.0; 4]),
            &OcpBounds::default(),
        );
        assert_eq!(m.engine_on_ratio, 0.5);
    }

    #[test]
    fn fuel_is_the_final_cumulative_value() {
        let m = compute_metrics(&log(&[true; 3], &[0.25, 0.5, 0.125]), &OcpBounds::default());
        assert_eq!(m.fuel_total, 0.875);
        assert_eq!(m.soc_terminal_dev, 0.0);
    }

    #[test]
    fn violations_are_counted_beyond_tolerance() {
        let mut l = log(&[false; 3], &[0.0; 3]);
        l.records[1].t_cl = 39.6;
        l.records[2].t_cl = 39.0;
        l.records[2].t_cat = 249.0;
        let m = compute_metrics(&l, &OcpBounds::default());
        assert_eq!(m.violations.t_cl.count, 1);
        assert!((m.violations.t_cl.max - 1.0).abs() < 1e-12);
        assert_eq!(m.violations.t_cat.count, 1);
    }
}
