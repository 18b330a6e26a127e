//! Receding-horizon power-split controller.
//!
//! The engine on/off choice makes the transcribed problem nonconvex: a
//! running engine pays its idle fuel no matter how little it delivers. Each
//! step therefore fixes an on/off pattern over the horizon, solves the
//! resulting smooth NLP, and improves the pattern with needle variations: a
//! node's mode is flipped when the Hamiltonian built from the adjoint
//! costates predicts a gain, and the flip is kept only if the re-solved
//! problem is actually better. Several starting patterns are tried when no
//! warm start is available.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{power_split, traction_power, VehicleParams, VehicleState};
use crate::preview::SpeedPreview;
use crate::solver::{solve_nlp, Nlp, Solution, SolveOptions, SolveStatus};

use super::ocp::{transcribe_ocp, Ocp, OcpBounds, OcpSpec, ThermalMode, POWER_SCALE};
use super::rule_based::{rule_based_step, RuleBasedConfig};
use super::{ControlDecision, Diagnostics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcConfig {
    pub bounds: OcpBounds,
    /// Weight of the thermal penalty when bounds are softened (g/°C²)
    pub soft_weight: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Pattern-improvement rounds per step
    pub max_switch_rounds: usize,
    /// Smallest predicted gain (g) worth a mode flip
    pub switch_threshold: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            bounds: OcpBounds::default(),
            soft_weight: 1e4,
            tol: 1e-6,
            max_iter: 200,
            max_switch_rounds: 8,
            switch_threshold: 1e-3,
        }
    }
}

impl MpcConfig {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolveOptions::default()
        }
    }
}

/// Horizon plan kept for warm starting the next step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcPlan {
    pub node_times: Vec<f64>,
    /// Planned engine power per node (W)
    pub p_eng: Vec<f64>,
    pub engine_on: Vec<bool>,
}

/// Initial battery powers (W) for the problem `ocp` from the previous plan.
///
/// Each new node takes the engine power and mode of the previous node whose
/// interval contains its start time, so the plan shifts by the elapsed time;
/// nodes past the old horizon repeat its last entry. Without a previous plan
/// the guess is all zeros.
pub fn warm_start_shift(prev: Option<&MpcPlan>, ocp: &Ocp) -> Vec<f64> {
    let n = ocp.nodes();
    let Some(prev) = prev.filter(|p| !p.node_times.is_empty()) else {
        return vec![0.0; n];
    };
    let times = ocp.spec().preview.node_times();
    let on_width = 2.0 * ocp.params().engine.on_threshold;
    (0..n)
        .map(|j| {
            let i = prev
                .node_times
                .partition_point(|&t| t <= times[j] + 1e-9)
                .saturating_sub(1);
            let on = prev.engine_on[i];
            let p_eng = if on { prev.p_eng[i].max(on_width) } else { 0.0 };
            let u = (ocp.demand()[j] - p_eng) / POWER_SCALE;
            let (lo, hi) = ocp
                .mode_range(j, on)
                .unwrap_or((ocp.lower()[j], ocp.upper()[j]));
            u.clamp(lo, hi) * POWER_SCALE
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Candidate {
    pattern: Vec<bool>,
    sol: Solution,
}

impl Candidate {
    fn feasible(&self, tol: f64) -> bool {
        self.sol.kkt.feasibility <= tol
    }

    fn objective(&self) -> f64 {
        self.sol.report.objective
    }
}

struct PatternSearch<'o, 'p> {
    ocp: &'o Ocp<'p>,
    opts: SolveOptions,
    cfg: &'o MpcConfig,
    iterations: usize,
}

impl PatternSearch<'_, '_> {
    /// Candidates must meet the constraints to the solver tolerance; SOC rows
    /// are unscaled, so anything looser lets the terminal band slip.
    fn feas_tol(&self) -> f64 {
        self.opts.tol
    }

    fn better(&self, a: &Candidate, b: &Candidate) -> bool {
        let tol = self.feas_tol();
        match (a.feasible(tol), b.feasible(tol)) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => a.objective() < b.objective() - 1e-9,
            (false, false) => a.sol.kkt.feasibility < b.sol.kkt.feasibility,
        }
    }

    /// Flips nodes whose requested mode is impossible.
    fn repair(&self, pattern: &mut [bool]) {
        for (k, on) in pattern.iter_mut().enumerate() {
            if self.ocp.mode_range(k, *on).is_none() {
                *on = !*on;
            }
        }
    }

    fn solve(&mut self, pattern: Vec<bool>, u0: &[f64]) -> Option<Candidate> {
        let sub = self.ocp.with_pattern(&pattern)?;
        let sol = solve_nlp(&sub, u0, &self.opts);
        self.iterations += sol.report.iterations;
        Some(Candidate { pattern, sol })
    }

    /// Mode flips predicted to lower the Lagrangian, best first, with the
    /// control to use at the flipped node.
    fn needles(&self, c: &Candidate) -> Vec<(usize, f64, f64)> {
        let ocp = self.ocp;
        let u = &c.sol.x;
        let r = ocp.rollout(u);
        let mut grad = vec![0.0; u.len()];
        let costates = ocp.adjoint(&r, &c.sol.mult_ineq, &mut grad);
        let mut out = Vec::new();
        for k in 0..u.len() {
            let x = r.states[k];
            let lam = costates[k];
            let ham = |v: f64| {
                let nd = ocp.node(k, &x, v);
                nd.cost + (0..3).map(|i| lam[i] * nd.next[i]).sum::<f64>()
            };
            let current = ham(u[k]);
            let Some((lo, hi)) = ocp.mode_range(k, !c.pattern[k]) else {
                continue;
            };
            let samples = if hi > lo { 16 } else { 1 };
            let (mut best_u, mut best_h) = (lo, f64::INFINITY);
            for i in 0..samples {
                let v = if samples == 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (samples - 1) as f64
                };
                let h = ham(v);
                if h < best_h {
                    best_h = h;
                    best_u = v;
                }
            }
            let gain = best_h - current;
            if gain < -self.cfg.switch_threshold {
                out.push((k, gain, best_u));
            }
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    fn improve(&mut self, mut best: Candidate) -> Candidate {
        for _ in 0..self.cfg.max_switch_rounds {
            let flips = self.needles(&best);
            if flips.is_empty() {
                break;
            }
            let mut count = flips.len();
            let mut improved = false;
            loop {
                let mut pattern = best.pattern.clone();
                let mut u = best.sol.x.clone();
                for &(k, _, v) in &flips[..count] {
                    pattern[k] = !pattern[k];
                    u[k] = v;
                }
                if let Some(c) = self.solve(pattern, &u) {
                    if self.better(&c, &best) {
                        best = c;
                        improved = true;
                        break;
                    }
                }
                if count == 1 {
                    break;
                }
                count /= 2;
            }
            if !improved {
                break;
            }
        }
        best
    }

    fn run(&mut self, mut pattern: Vec<bool>, u0: &[f64]) -> Option<Candidate> {
        self.repair(&mut pattern);
        let start = self.solve(pattern, u0)?;
        Some(self.improve(start))
    }

    /// Starting patterns without history: the engine follows the load, and
    /// the engine runs only where the battery cannot cover the demand.
    fn cold_seeds(&self) -> Vec<(Vec<bool>, Vec<f64>)> {
        let ocp = self.ocp;
        let n = ocp.nodes();
        let zeros = vec![0.0; n];
        let following = (ocp.pattern_of(&zeros), zeros);
        let electric: Vec<f64> = (0..n)
            .map(|k| match ocp.mode_range(k, false) {
                Some((lo, _)) => lo,
                None => ocp.upper()[k],
            })
            .collect();
        let ev = (ocp.pattern_of(&electric), electric);
        vec![following, ev]
    }
}

/// One MPC decision. Returns the decision and the plan for warm starting.
pub fn mpc_step(
    s: &VehicleState,
    preview: &SpeedPreview,
    warm: Option<&MpcPlan>,
    params: &VehicleParams,
    cfg: &MpcConfig,
    rule: &RuleBasedConfig,
    soc_reference: f64,
) -> Result<(ControlDecision, Option<MpcPlan>)> {
    let start = std::time::Instant::now();
    let mut spec = OcpSpec::new(*s, preview.clone(), soc_reference);
    spec.bounds = cfg.bounds.clone();
    let Ok(ocp) = transcribe_ocp(spec, params) else {
        return fallback(s, preview, params, rule, 0, start);
    };
    let opts = cfg.solve_options();
    let mut search = PatternSearch {
        ocp: &ocp,
        opts,
        cfg,
        iterations: 0,
    };
    let scaled = |w: Vec<f64>| -> Vec<f64> { w.into_iter().map(|p| p / POWER_SCALE).collect() };

    let mut best: Option<Candidate> = None;
    let consider = |best: &mut Option<Candidate>, c: Option<Candidate>, search: &PatternSearch| {
        if let Some(c) = c {
            if best.as_ref().is_none_or(|b| search.better(&c, b)) {
                *best = Some(c);
            }
        }
    };
    if warm.is_some() {
        let u0 = scaled(warm_start_shift(warm, &ocp));
        let c = search.run(ocp.pattern_of(&u0), &u0);
        consider(&mut best, c, &search);
    }
    let tol = search.feas_tol();
    if best.as_ref().is_none_or(|b| !b.feasible(tol)) {
        for (pattern, u0) in search.cold_seeds() {
            let c = search.run(pattern, &scaled(u0));
            consider(&mut best, c, &search);
        }
    }

    let mut soft = false;
    if best.as_ref().is_none_or(|b| !b.feasible(tol)) {
        let relaxed = ocp.with_thermal(ThermalMode::Soft {
            weight: cfg.soft_weight,
        });
        let mut soft_search = PatternSearch {
            ocp: &relaxed,
            opts,
            cfg,
            iterations: search.iterations,
        };
        let mut seeds = soft_search.cold_seeds();
        if let Some(b) = &best {
            seeds.insert(0, (b.pattern.clone(), b.sol.x.clone()));
        }
        let mut soft_best: Option<Candidate> = None;
        for (pattern, u0) in seeds {
            let c = soft_search.run(pattern, &u0);
            consider(&mut soft_best, c, &soft_search);
        }
        search.iterations = soft_search.iterations;
        if soft_best.as_ref().is_some_and(|b| b.feasible(tol)) {
            best = soft_best;
            soft = true;
        } else {
            best = None;
        }
    }

    let Some(best) = best else {
        return fallback(s, preview, params, rule, search.iterations, start);
    };
    let u = &best.sol.x;
    let p_bat = u[0] * POWER_SCALE;
    let flows = power_split(
        ocp.traction()[0],
        p_bat,
        params.aux_load(),
        params.p_eng_max(),
    )?;
    let status = match best.sol.report.status {
        SolveStatus::Optimal => SolveStatus::Optimal,
        _ => SolveStatus::MaxIter,
    };
    let decision = ControlDecision {
        p_bat,
        engine_on: params.engine.is_on(flows.p_eng),
        p_eng: flows.p_eng,
        diagnostics: Some(Diagnostics {
            status,
            cost: ocp.rollout(u).fuel / 1e3,
            iterations: search.iterations,
            wall_time: start.elapsed().as_secs_f64(),
            soft,
        }),
    };
    let plan = MpcPlan {
        node_times: preview.node_times(),
        p_eng: u
            .iter()
            .zip(ocp.demand())
            .map(|(v, d)| (d - v * POWER_SCALE).max(0.0))
            .collect(),
        engine_on: best.pattern.clone(),
    };
    Ok((decision, Some(plan)))
}

fn fallback(
    s: &VehicleState,
    preview: &SpeedPreview,
    params: &VehicleParams,
    rule: &RuleBasedConfig,
    iterations: usize,
    start: std::time::Instant,
) -> Result<(ControlDecision, Option<MpcPlan>)> {
    let (v, a) = preview
        .node_kinematics()
        .first()
        .copied()
        .unwrap_or((0.0, 0.0));
    let p_trac = traction_power(v, a, &params.road_load);
    let mut d = rule_based_step(s, p_trac, params.aux_load(), rule, params)?;
    d.diagnostics = Some(Diagnostics {
        status: SolveStatus::Fallback,
        cost: f64::NAN,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        soft: false,
    });
    Ok((d, None))
}

/// Stateful MPC that carries its plan between steps.
#[derive(Debug, Clone)]
pub struct MpcController {
    pub params: VehicleParams,
    pub config: MpcConfig,
    pub rule: RuleBasedConfig,
    pub soc_reference: f64,
    plan: Option<MpcPlan>,
}

impl MpcController {
    pub fn new(
        params: VehicleParams,
        config: MpcConfig,
        rule: RuleBasedConfig,
        soc_reference: f64,
    ) -> Self {
        Self {
            params,
            config,
            rule,
            soc_reference,
            plan: None,
        }
    }

    pub fn plan(&self) -> Option<&MpcPlan> {
        self.plan.as_ref()
    }

    pub fn reset(&mut self) {
        self.plan = None;
    }

    pub fn step(&mut self, s: &VehicleState, preview: &SpeedPreview) -> Result<ControlDecision> {
        let (d, plan) = mpc_step(
            s,
            preview,
            self.plan.as_ref(),
            &self.params,
            &self.config,
            &self.rule,
            self.soc_reference,
        )?;
        self.plan = plan;
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preview(short: Vec<f64>, long: Vec<f64>) -> SpeedPreview {
        let t_end = short.len() as f64 + 10.0 * long.len() as f64;
        SpeedPreview {
            t_now: 0.0,
            dt1: 1.0,
            dt2: 10.0,
            v_join: long.first().copied().unwrap_or(0.0),
            short,
            long,
            t_end,
        }
    }

    fn state(t_cat: f64) -> VehicleState {
        VehicleState {
            soc: 0.6,
            t_cl: 70.0,
            t_cat,
            engine_on: false,
        }
    }

    fn step(s: &VehicleState, pv: &SpeedPreview) -> (ControlDecision, Option<MpcPlan>) {
        let p = VehicleParams::default();
        mpc_step(
            s,
            pv,
            None,
            &p,
            &MpcConfig::default(),
            &RuleBasedConfig::default(),
            0.6,
        )
        .unwrap()
    }

    #[test]
    fn cruise_step_is_optimal_and_balanced() {
        let pv = preview(vec![12.0; 5], vec![12.0; 10]);
        let (d, plan) = step(&state(400.0), &pv);
        let diag = d.diagnostics.unwrap();
        assert_eq!(diag.status, SolveStatus::Optimal);
        assert!(plan.is_some());
        let p = VehicleParams::default();
        let p_trac = traction_power(12.0, 0.0, &p.road_load);
        assert!((d.p_eng + d.p_bat - p.aux_load() - p_trac).abs() < 1e-6);
        assert!(d.p_bat >= p.battery.p_min && d.p_bat <= p.battery.p_max);
    }

    #[test]
    fn catalyst_at_light_off_forces_engine_on() {
        let pv = preview(vec![10.0; 5], vec![10.0; 10]);
        let (d, _) = step(&state(250.0), &pv);
        assert!(d.engine_on);
    }

    #[test]
    fn shifted_guess_has_new_length() {
        let p = VehicleParams::default();
        let pv = preview(vec![10.0; 5], vec![10.0; 10]);
        let ocp = transcribe_ocp(OcpSpec::new(state(400.0), pv.clone(), 0.6), &p).unwrap();
        assert_eq!(warm_start_shift(None, &ocp), vec![0.0; 15]);
        let plan = MpcPlan {
            node_times: pv.node_times(),
            p_eng: vec![20e3; 15],
            engine_on: vec![true; 15],
        };
        let mut later = pv.clone();
        later.t_now = 10.0;
        later.long.pop();
        let ocp2 = transcribe_ocp(OcpSpec::new(state(400.0), later, 0.6), &p).unwrap();
        let g = warm_start_shift(Some(&plan), &ocp2);
        assert_eq!(g.len(), 14);
        let demand = ocp2.demand()[0];
        assert!((g[0] - (demand - 20e3)).abs() < 1e-9);
    }
}
