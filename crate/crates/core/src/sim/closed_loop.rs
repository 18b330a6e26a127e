//! Plant, preview and controller stepped together at the fine resolution.

use serde::{Deserialize, Serialize};

use crate::control::{rule_based_step, ControlDecision, MpcController};
use crate::error::{Error, Result};
use crate::models::{evaluate_step, integrate_step, traction_power, ControlInput, VehicleState};
use crate::preview::{build_preview, estimate_trip_end, BinProfile, DriveTrace, PreviewMode};
use crate::solver::SolveStatus;

use super::config::{ControllerKind, SimConfig};

/// One fine step: the state at `t` and what was applied over `[t, t + dt]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub v: f64,
    pub p_trac: f64,
    pub p_bat: f64,
    pub p_eng: f64,
    pub soc: f64,
    pub t_cl: f64,
    pub t_cat: f64,
    pub engine_on: bool,
    /// Fuel used up to `t + dt` (kg)
    pub fuel_cum: f64,
    pub status: Option<SolveStatus>,
    pub iterations: usize,
    pub soft: bool,
    /// Controller time (s); excluded from the trajectory CSV
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub initial: VehicleState,
    pub records: Vec<StepRecord>,
    /// State after the last step
    pub final_state: VehicleState,
}

impl TrajectoryLog {
    pub fn fuel_total(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.fuel_cum)
    }

    /// States at every step start plus the final state.
    pub fn states(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.records
            .iter()
            .map(|r| (r.soc, r.t_cl, r.t_cat))
            .chain(std::iter::once((
                self.final_state.soc,
                self.final_state.t_cl,
                self.final_state.t_cat,
            )))
    }
}

/// Runs the configured controller over `trace`. `profile` is the long-range
/// source for the binned preview and is required only in that mode.
pub fn run_closed_loop(
    cfg: &SimConfig,
    trace: &DriveTrace,
    profile: Option<&BinProfile>,
) -> Result<TrajectoryLog> {
    let scn = &cfg.scenario;
    let params = cfg.vehicle_params();
    let dt1 = scn.dt1;
    let t0 = trace.start_time();
    let steps = ((trace.end_time() - t0) / dt1 + 1e-9).floor() as usize;
    let t_end = t0 + steps as f64 * dt1;
    let mut state = VehicleState {
        soc: scn.soc_init,
        t_cl: scn.t_cl_init,
        t_cat: scn.t_cat_init,
        engine_on: false,
    };
    let initial = state;
    let own = BinProfile::from_trace(trace, dt1);
    let long_source = match (scn.controller, scn.preview) {
        (ControllerKind::Mpc, PreviewMode::Binned) => {
            profile.ok_or_else(|| Error::Config("binned preview needs a bin profile".into()))?
        }
        _ => &own,
    };
    let mut mpc = MpcController::new(
        params.clone(),
        cfg.controller.mpc.clone(),
        cfg.controller.rule_based.clone(),
        scn.soc_init,
    );
    let mut records = Vec::with_capacity(steps);
    let mut fuel = 0.0;

    for i in 0..steps {
        let t = t0 + i as f64 * dt1;
        let v = trace.speed_at(t);
        let v_next = trace.speed_at(t + dt1);
        let (v_mean, a) = (0.5 * (v + v_next), (v_next - v) / dt1);
        let p_trac = traction_power(v_mean, a, &params.road_load);
        let started = std::time::Instant::now();
        let decision: ControlDecision = match scn.controller {
            ControllerKind::RuleBased => rule_based_step(
                &state,
                p_trac,
                params.aux_load(),
                &cfg.controller.rule_based,
                &params,
            ),
            ControllerKind::Mpc => {
                let remaining = t_end - t;
                // the last stretch is resolved at the fine step all the way to the end
                let final_approach = remaining <= scn.h_r as f64 * dt1 + scn.dt2 + 1e-9;
                let (h_r, t_horizon) = if final_approach {
                    (((remaining / dt1) + 1e-9).floor().max(1.0) as usize, t_end)
                } else {
                    let t_horizon = match scn.preview {
                        PreviewMode::Exact => t_end,
                        PreviewMode::Binned => {
                            let est = estimate_trip_end(
                                t,
                                trace,
                                long_source,
                                scn.h_r,
                                dt1,
                                cfg.corridor.length,
                            );
                            est.max(t + (scn.h_r as f64 + 1.0) * dt1)
                        }
                    };
                    (scn.h_r, t_horizon)
                };
                build_preview(
                    t,
                    trace,
                    long_source,
                    scn.preview,
                    h_r,
                    dt1,
                    scn.dt2,
                    t_horizon,
                )
                .and_then(|pv| mpc.step(&state, &pv))
            }
        }
        .map_err(|e| abort(t, &records, e))?;
        let wall_time = started.elapsed().as_secs_f64();

        let flows = evaluate_step(&state, decision.p_bat, v_mean, a, &params)
            .map_err(|e| abort(t, &records, e))?;
        let u = ControlInput {
            p_bat: decision.p_bat,
            engine_on: decision.engine_on,
        };
        let next = integrate_step(&state, &u, v_mean, a, dt1, &params)
            .map_err(|e| abort(t, &records, e))?;
        fuel += flows.fuel_rate * dt1;
        let diag = decision.diagnostics.as_ref();
        records.push(StepRecord {
            t,
            v,
            p_trac,
            p_bat: decision.p_bat,
            p_eng: flows.p_eng,
            soc: state.soc,
            t_cl: state.t_cl,
            t_cat: state.t_cat,
            engine_on: flows.engine_on,
            fuel_cum: fuel,
            status: diag.map(|d| d.status),
            iterations: diag.map_or(0, |d| d.iterations),
            soft: diag.is_some_and(|d| d.soft),
            wall_time,
        });
        state = next;
    }
    Ok(TrajectoryLog {
        dt: dt1,
        initial,
        records,
        final_state: state,
    })
}

fn abort(t: f64, records: &[StepRecord], e: Error) -> Error {
    if let Some(last) = records.last() {
        log::error!(
            "run aborted at t={t}: last step t={} soc={} t_cl={} t_cat={} p_bat={}",
            last.t,
            last.soc,
            last.t_cl,
            last.t_cat,
            last.p_bat
        );
    }
    Error::InfeasibleRun {
        t,
        msg: e.to_string(),
    }
}
