//! Single-shooting transcription of the power-split optimal control problem
//! over a two-resolution speed preview.
//!
//! Decision variables are battery powers `u_k = p_bat,k / POWER_SCALE`, one per
//! preview node. States are eliminated by forward-Euler rollout, the power
//! balance holds by construction, and the engine on/off switch enters through
//! a C¹ gate of the implied engine power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    catalyst_branches, soc_rate_partials, traction_power, VehicleParams, VehicleState,
};
use crate::preview::SpeedPreview;
use crate::solver::Nlp;

/// Watts per decision-variable unit.
pub const POWER_SCALE: f64 = 1e4;
/// Kelvin per scaled temperature-constraint unit.
const TEMP_SCALE: f64 = 100.0;
/// Objective units per kg of fuel.
const GRAMS: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcpBounds {
    pub soc: (f64, f64),
    pub t_cl: (f64, f64),
    /// Catalyst light-off temperature (°C)
    pub t_cat_min: f64,
    /// The light-off bound is enforced when the current catalyst temperature
    /// is at least `t_cat_min − light_off_margin`.
    pub light_off_margin: f64,
    /// Terminal SOC band as fractions of the reference SOC
    pub terminal_band: (f64, f64),
}

impl Default for OcpBounds {
    fn default() -> Self {
        Self {
            soc: (0.4, 0.8),
            t_cl: (40.0, 90.0),
            t_cat_min: 250.0,
            light_off_margin: 1.0,
            terminal_band: (0.99, 1.01),
        }
    }
}

impl OcpBounds {
    pub fn validate(&self) -> Result<()> {
        let ordered = |(lo, hi): (f64, f64)| lo < hi;
        if !(ordered(self.soc) && ordered(self.t_cl) && ordered(self.terminal_band)) {
            return Err(Error::InvalidParameter("OCP bounds must be ordered".into()));
        }
        if !(self.soc.0 >= 0.0 && self.soc.1 <= 1.0 && self.light_off_margin >= 0.0) {
            return Err(Error::InvalidParameter(
                "OCP SOC bounds must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// How the thermal path bounds enter the problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalMode {
    Hard,
    /// Quadratic penalty (g per °C² per node) instead of constraints
    Soft {
        weight: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcpSpec {
    pub initial: VehicleState,
    pub preview: SpeedPreview,
    pub bounds: OcpBounds,
    /// SOC the terminal band is relative to (the trip's initial SOC)
    pub soc_reference: f64,
    pub thermal: ThermalMode,
}

impl OcpSpec {
    pub fn new(initial: VehicleState, preview: SpeedPreview, soc_reference: f64) -> Self {
        Self {
            initial,
            preview,
            bounds: OcpBounds::default(),
            soc_reference,
            thermal: ThermalMode::Hard,
        }
    }

    pub fn light_off_active(&self) -> bool {
        self.initial.t_cat >= self.bounds.t_cat_min - self.bounds.light_off_margin
    }
}

/// Per-node linearization of one Euler step. State order: SOC, T_cl, T_cat.
/// The state Jacobian is diagonal because each rate depends only on its own
/// state and the control.
#[derive(Debug, Clone, Copy, Default)]
pub struct NodeEval {
    pub next: [f64; 3],
    /// Stage fuel (g)
    pub cost: f64,
    /// ∂next/∂x diagonal
    pub a: [f64; 3],
    /// ∂next/∂u
    pub b: [f64; 3],
    pub dl_dx: [f64; 3],
    pub dl_du: f64,
}

/// The transcribed problem. Implements [`Nlp`].
#[derive(Debug, Clone)]
pub struct Ocp<'a> {
    params: &'a VehicleParams,
    spec: OcpSpec,
    speeds: Vec<f64>,
    dt: Vec<f64>,
    p_trac: Vec<f64>,
    /// Electrical-side demand `p_trac + aux` per node (W)
    demand: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    per_node: usize,
    light_off: bool,
}

/// Gate `σ(p)` rising from 0 at `p ≤ 0` to 1 at `p ≥ width`, and its slope.
fn gate(p: f64, width: f64) -> (f64, f64) {
    if p <= 0.0 {
        (0.0, 0.0)
    } else if p >= width {
        (1.0, 0.0)
    } else {
        let s = p / width;
        (s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s) / width)
    }
}

/// Builds the NLP for `spec`.
pub fn transcribe_ocp(spec: OcpSpec, params: &VehicleParams) -> Result<Ocp<'_>> {
    spec.bounds.validate()?;
    let pv = &spec.preview;
    if pv.is_empty() {
        return Err(Error::InvalidParameter("preview has no nodes".into()));
    }
    let kin = pv.node_kinematics();
    let speeds: Vec<f64> = kin.iter().map(|k| k.0).collect();
    let dt = pv.step_durations();
    if dt.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidParameter(
            "preview step durations must be positive".into(),
        ));
    }
    let aux = params.aux_load();
    let p_trac: Vec<f64> = kin
        .iter()
        .map(|&(v, a)| traction_power(v, a, &params.road_load))
        .collect();
    let demand: Vec<f64> = p_trac.iter().map(|p| p + aux).collect();
    let b = &params.battery;
    let p_max_eng = params.p_eng_max();
    let mut lower = Vec::with_capacity(demand.len());
    let mut upper = Vec::with_capacity(demand.len());
    for (k, d) in demand.iter().enumerate() {
        let lo = b.p_min.max(d - p_max_eng);
        let hi = b.p_max.min(d.max(aux));
        if lo > hi {
            return Err(Error::InfeasibleDemand(format!(
                "node {k}: demand {d} W cannot be met within engine and battery limits"
            )));
        }
        lower.push(lo / POWER_SCALE);
        upper.push(hi / POWER_SCALE);
    }
    let light_off = spec.light_off_active();
    let per_node = match spec.thermal {
        ThermalMode::Hard => 4 + usize::from(light_off),
        ThermalMode::Soft { .. } => 2,
    };
    Ok(Ocp {
        params,
        spec,
        speeds,
        dt,
        p_trac,
        demand,
        lower,
        upper,
        per_node,
        light_off,
    })
}

/// State trajectory and per-node flows of a rollout.
#[derive(Debug, Clone)]
pub struct Rollout {
    /// States at nodes `0..=N`
    pub states: Vec<[f64; 3]>,
    pub nodes: Vec<NodeEval>,
    /// Fuel over the horizon (g), without penalties
    pub fuel: f64,
}

impl<'a> Ocp<'a> {
    pub fn spec(&self) -> &OcpSpec {
        &self.spec
    }

    pub fn params(&self) -> &'a VehicleParams {
        self.params
    }

    pub fn nodes(&self) -> usize {
        self.demand.len()
    }

    pub fn traction(&self) -> &[f64] {
        &self.p_trac
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn durations(&self) -> &[f64] {
        &self.dt
    }

    pub fn light_off_active(&self) -> bool {
        self.light_off
    }

    fn on_width(&self) -> f64 {
        2.0 * self.params.engine.on_threshold
    }

    /// Engine on at node `k` for scaled battery power `u`.
    pub fn engine_on_at(&self, k: usize, u: f64) -> bool {
        self.params.engine.is_on(self.demand[k] - u * POWER_SCALE)
    }

    pub fn pattern_of(&self, u: &[f64]) -> Vec<bool> {
        u.iter()
            .enumerate()
            .map(|(k, &v)| self.engine_on_at(k, v))
            .collect()
    }

    /// Scaled box for node `k` restricted to one engine mode; `None` if the
    /// mode is impossible there.
    pub fn mode_range(&self, k: usize, on: bool) -> Option<(f64, f64)> {
        let (lo, hi) = (self.lower[k], self.upper[k]);
        let d = self.demand[k] / POWER_SCALE;
        let (a, b) = if on {
            (lo, hi.min(d - self.on_width() / POWER_SCALE))
        } else {
            (lo.max(d), hi)
        };
        (a <= b).then_some((a, b))
    }

    /// Copy with each node confined to the engine mode in `pattern`. `None`
    /// if some node cannot take its mode.
    pub fn with_pattern(&self, pattern: &[bool]) -> Option<Ocp<'a>> {
        assert_eq!(pattern.len(), self.nodes());
        let mut out = self.clone();
        for (k, &on) in pattern.iter().enumerate() {
            let (a, b) = self.mode_range(k, on)?;
            out.lower[k] = a;
            out.upper[k] = b;
        }
        Some(out)
    }

    /// Same problem with a different thermal mode.
    pub fn with_thermal(&self, thermal: ThermalMode) -> Ocp<'a> {
        let mut spec = self.spec.clone();
        spec.thermal = thermal;
        let mut out = self.clone();
        out.per_node = match thermal {
            ThermalMode::Hard => 4 + usize::from(self.light_off),
            ThermalMode::Soft { .. } => 2,
        };
        out.spec = spec;
        out
    }

    /// One Euler step from `x` at node `k` with scaled battery power `u`.
    pub fn node(&self, k: usize, x: &[f64; 3], u: f64) -> NodeEval {
        let p = self.params;
        let th = &p.engine_thermal;
        let (dt, v) = (self.dt[k], self.speeds[k]);
        let p_bat = u * POWER_SCALE;
        let p_raw = self.demand[k] - p_bat;
        let (g, dg) = gate(p_raw, self.on_width());
        let p_max = p.p_eng_max();
        let p_e = p_raw.clamp(0.0, p_max);
        let dpe = if p_raw > 0.0 && p_raw < p_max {
            1.0
        } else {
            0.0
        };
        let sample = p.engine.ool.sample(p_e);
        let (alpha, d_alpha) = p.engine.warmup.eval(x[1]);
        let (fp, dfp) = p.engine.fuel_map.fuel_power(p_e);
        let lhv = th.lhv;

        // stage fuel in grams
        let fuel = GRAMS * dt * g * alpha * fp / lhv;
        let dl_dtcl = GRAMS * dt * g * d_alpha * fp / lhv;
        let dl_dp = GRAMS * dt * alpha * (dg * fp + g * dfp * dpe) / lhv;

        // battery; the box keeps p_bat below the discriminant limit
        let sr = soc_rate_partials(x[0], p_bat, &p.battery)
            .expect("battery power inside the validated box");

        // coolant
        let mc = th.heat_capacity();
        let retained = 1.0 - th.exhaust_fraction;
        let losses = th.air_conductance * (x[1] - p.t_amb()) + th.cabin_heat();
        let q_on = (retained * alpha * fp - p_e) / mc;
        let cl_rate = g * q_on - losses / mc;
        let cl_dx = g * retained * d_alpha * fp / mc - th.air_conductance / mc;
        let cl_dp = dg * q_on + g * (retained * alpha * dfp - 1.0) * dpe / mc;

        // catalyst
        let br = catalyst_branches(x[2], v, &sample.point, &p.catalyst);
        let cat_rate = g * br.on + (1.0 - g) * br.off;
        let cat_dx = g * br.d_on_t_cat + (1.0 - g) * br.d_off_t_cat;
        let cat_dp = dg * (br.on - br.off)
            + g * (br.d_on_omega * sample.d_omega + br.d_on_tau * sample.d_tau) * dpe;

        // dp_raw/du = −POWER_SCALE
        let s = -POWER_SCALE;
        NodeEval {
            next: [
                x[0] + dt * sr.value,
                x[1] + dt * cl_rate,
                x[2] + dt * cat_rate,
            ],
            cost: fuel,
            a: [1.0 + dt * sr.d_soc, 1.0 + dt * cl_dx, 1.0 + dt * cat_dx],
            b: [
                dt * sr.d_p_bat * POWER_SCALE,
                dt * cl_dp * s,
                dt * cat_dp * s,
            ],
            dl_dx: [0.0, dl_dtcl, 0.0],
            dl_du: dl_dp * s,
        }
    }

    pub fn initial_state(&self) -> [f64; 3] {
        let s = &self.spec.initial;
        [s.soc, s.t_cl, s.t_cat]
    }

    pub fn rollout(&self, u: &[f64]) -> Rollout {
        let mut x = self.initial_state();
        let mut states = Vec::with_capacity(u.len() + 1);
        let mut nodes = Vec::with_capacity(u.len());
        let mut fuel = 0.0;
        states.push(x);
        for (k, &uk) in u.iter().enumerate() {
            let n = self.node(k, &x, uk);
            fuel += n.cost;
            x = n.next;
            states.push(x);
            nodes.push(n);
        }
        Rollout {
            states,
            nodes,
            fuel,
        }
    }

    /// Penalty (g) and its state gradient for the soft thermal mode.
    fn penalty(&self, x: &[f64; 3]) -> (f64, [f64; 3]) {
        let ThermalMode::Soft { weight } = self.spec.thermal else {
            return (0.0, [0.0; 3]);
        };
        let b = &self.spec.bounds;
        let mut val = 0.0;
        let mut grad = [0.0; 3];
        let over = x[1] - b.t_cl.1;
        let under = b.t_cl.0 - x[1];
        if over > 0.0 {
            val += weight * over * over;
            grad[1] += 2.0 * weight * over;
        }
        if under > 0.0 {
            val += weight * under * under;
            grad[1] -= 2.0 * weight * under;
        }
        if self.light_off {
            let cold = b.t_cat_min - x[2];
            if cold > 0.0 {
                val += weight * cold * cold;
                grad[2] -= 2.0 * weight * cold;
            }
        }
        (val, grad)
    }

    /// Path constraints at node state `x` and their (constant) state gradients.
    fn path_constraints(&self, x: &[f64; 3], out: &mut [f64]) {
        let b = &self.spec.bounds;
        out[0] = x[0] - b.soc.1;
        out[1] = b.soc.0 - x[0];
        if let ThermalMode::Hard = self.spec.thermal {
            out[2] = (x[1] - b.t_cl.1) / TEMP_SCALE;
            out[3] = (b.t_cl.0 - x[1]) / TEMP_SCALE;
            if self.light_off {
                out[4] = (b.t_cat_min - x[2]) / TEMP_SCALE;
            }
        }
    }

    fn path_gradient(&self, w: &[f64], lam: &mut [f64; 3]) {
        lam[0] += w[0] - w[1];
        if let ThermalMode::Hard = self.spec.thermal {
            lam[1] += (w[2] - w[3]) / TEMP_SCALE;
            if self.light_off {
                lam[2] -= w[4] / TEMP_SCALE;
            }
        }
    }

    fn terminal_band(&self) -> (f64, f64) {
        let (lo, hi) = self.spec.bounds.terminal_band;
        (lo * self.spec.soc_reference, hi * self.spec.soc_reference)
    }

    fn fill_constraints(&self, r: &Rollout, ineq: &mut [f64]) -> f64 {
        let m = self.per_node;
        let mut pen = 0.0;
        for (k, x) in r.states[1..].iter().enumerate() {
            self.path_constraints(x, &mut ineq[k * m..(k + 1) * m]);
            pen += self.penalty(x).0;
        }
        let n = self.nodes();
        let (lo, hi) = self.terminal_band();
        let soc_n = r.states[n][0];
        ineq[n * m] = soc_n - hi;
        ineq[n * m + 1] = lo - soc_n;
        pen
    }

    /// Backward pass: gradient of `fuel + penalty + Σ w·g` and the costates
    /// `λ_{k+1} = ∂(·)/∂x_{k+1}` used at each node.
    pub fn adjoint(&self, r: &Rollout, w_ineq: &[f64], grad: &mut [f64]) -> Vec<[f64; 3]> {
        let n = self.nodes();
        let m = self.per_node;
        let mut costates = vec![[0.0; 3]; n];
        let mut lam = [0.0; 3];
        lam[0] += w_ineq[n * m] - w_ineq[n * m + 1];
        for k in (0..n).rev() {
            // contributions of constraints and penalty at x_{k+1}
            self.path_gradient(&w_ineq[k * m..(k + 1) * m], &mut lam);
            let pg = self.penalty(&r.states[k + 1]).1;
            for i in 0..3 {
                lam[i] += pg[i];
            }
            costates[k] = lam;
            let nd = &r.nodes[k];
            grad[k] = nd.dl_du + (0..3).map(|i| lam[i] * nd.b[i]).sum::<f64>();
            for (i, l) in lam.iter_mut().enumerate() {
                *l = nd.dl_dx[i] + *l * nd.a[i];
            }
        }
        costates
    }

    /// Objective value (g, including any soft penalty) of a control vector.
    pub fn objective(&self, u: &[f64]) -> f64 {
        let mut g = vec![0.0; self.num_ineq()];
        self.evaluate(u, &mut g, &mut [])
    }

    /// Largest constraint excess of a control vector.
    pub fn max_violation(&self, u: &[f64]) -> f64 {
        let mut g = vec![0.0; self.num_ineq()];
        self.evaluate(u, &mut g, &mut []);
        g.iter().fold(0.0, |a, v| a.max(*v))
    }
}

impl Nlp for Ocp<'_> {
    fn dim(&self) -> usize {
        self.nodes()
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn num_ineq(&self) -> usize {
        self.nodes() * self.per_node + 2
    }

    fn num_eq(&self) -> usize {
        0
    }

    fn evaluate(&self, x: &[f64], ineq: &mut [f64], _eq: &mut [f64]) -> f64 {
        let r = self.rollout(x);
        let pen = self.fill_constraints(&r, ineq);
        r.fuel + pen
    }

    fn weighted_gradient(&self, x: &[f64], w_ineq: &[f64], _w_eq: &[f64], grad: &mut [f64]) {
        let r = self.rollout(x);
        self.adjoint(&r, w_ineq, grad);
    }

    fn evaluate_with_gradient(
        &self,
        x: &[f64],
        ineq: &mut [f64],
        eq: &mut [f64],
        weights: &mut crate::solver::nlp::WeightRule,
        grad: &mut [f64],
    ) -> f64 {
        let r = self.rollout(x);
        let pen = self.fill_constraints(&r, ineq);
        let mut w = vec![0.0; ineq.len()];
        weights(ineq, eq, &mut w, &mut []);
        self.adjoint(&r, &w, grad);
        r.fuel + pen
    }
}
