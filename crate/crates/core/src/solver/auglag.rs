//! Augmented-Lagrangian (PHR) outer loop around a projected L-BFGS inner
//! solver for the box-constrained subproblems.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::kkt::{check_kkt, projected_gradient_norm, KktReport};
use super::nlp::Nlp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
    /// Set by callers that replaced the solution with a fallback policy.
    Fallback,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: f64,
    pub kkt_residual: f64,
    /// Inner (quasi-Newton) iterations over all outer rounds
    pub iterations: usize,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?.max(0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// KKT tolerance on the scaled problem
    pub tol: f64,
    /// Cap on outer augmented-Lagrangian rounds
    pub max_iter: usize,
    /// Cap on inner iterations per round
    pub max_inner: usize,
    pub initial_penalty: f64,
    pub max_penalty: f64,
    /// Violation above which an exhausted solve is reported infeasible
    pub infeasible_tol: f64,
    pub memory: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200,
            max_inner: 200,
            initial_penalty: 10.0,
            max_penalty: 1e9,
            infeasible_tol: 1e-4,
            memory: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub mult_ineq: Vec<f64>,
    pub mult_eq: Vec<f64>,
    pub kkt: KktReport,
    pub report: SolveReport,
}

/// Solves `nlp` from `x0` (projected into the box first).
pub fn solve_nlp(nlp: &dyn Nlp, x0: &[f64], opts: &SolveOptions) -> Solution {
    solve_nlp_warm(nlp, x0, None, opts)
}

/// As [`solve_nlp`], optionally seeded with inequality and equality
/// multipliers.
pub fn solve_nlp_warm(
    nlp: &dyn Nlp,
    x0: &[f64],
    multipliers: Option<(&[f64], &[f64])>,
    opts: &SolveOptions,
) -> Solution {
    let start = Instant::now();
    let n = nlp.dim();
    assert_eq!(x0.len(), n, "initial point has wrong dimension");
    let (lo, hi) = (nlp.lower(), nlp.upper());
    let mut x: Vec<f64> = x0
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(v, (l, h))| v.clamp(*l, *h))
        .collect();
    let (mi, me) = (nlp.num_ineq(), nlp.num_eq());
    let (mut mu, mut lam) = match multipliers {
        Some((a, b)) if a.len() == mi && b.len() == me => {
            (a.iter().map(|v| v.max(0.0)).collect(), b.to_vec())
        }
        _ => (vec![0.0; mi], vec![0.0; me]),
    };
    let mut rho = opts.initial_penalty;
    let mut iterations = 0;
    let mut g = vec![0.0; mi];
    let mut h = vec![0.0; me];
    let mut prev_violation = f64::INFINITY;
    let mut kkt = KktReport::default();

    for _round in 0..opts.max_iter.max(1) {
        let inner_tol = opts
            .tol
            .max((0.1 * prev_violation.min(1.0)).min(1e-2))
            .min(1e-2);
        iterations += minimize_box(nlp, &mut x, &mu, &lam, rho, inner_tol, opts);
        nlp.evaluate(&x, &mut g, &mut h);
        let violation = violation(&g, &h, &mu, rho);
        for (m, gi) in mu.iter_mut().zip(&g) {
            *m = (*m + rho * gi).max(0.0);
        }
        for (l, hi) in lam.iter_mut().zip(&h) {
            *l += rho * hi;
        }
        kkt = check_kkt(nlp, &x, &mu, &lam);
        if kkt.satisfied(opts.tol) {
            break;
        }
        if violation > 0.25 * prev_violation && kkt.feasibility > opts.tol {
            rho = (rho * 10.0).min(opts.max_penalty);
        }
        if rho >= opts.max_penalty
            && kkt.feasibility > opts.infeasible_tol
            && violation > 0.25 * prev_violation
        {
            break;
        }
        prev_violation = violation.min(prev_violation);
    }

    let objective = nlp.evaluate(&x, &mut g, &mut h);
    let status = if kkt.satisfied(opts.tol) {
        SolveStatus::Optimal
    } else if kkt.feasibility > opts.infeasible_tol {
        SolveStatus::Infeasible
    } else {
        SolveStatus::MaxIter
    };
    Solution {
        x,
        mult_ineq: mu,
        mult_eq: lam,
        kkt,
        report: SolveReport {
            status,
            objective,
            kkt_residual: kkt.residual(),
            iterations,
            wall_time: start.elapsed(),
        },
    }
}

/// PHR progress measure: `max(|h|, |max(g, −μ/ρ)|)`.
fn violation(g: &[f64], h: &[f64], mu: &[f64], rho: f64) -> f64 {
    g.iter()
        .zip(mu)
        .map(|(gi, m)| gi.max(-m / rho).abs())
        .chain(h.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
}

/// Augmented Lagrangian value and its constraint weights.
fn merit(f: f64, g: &[f64], h: &[f64], mu: &[f64], lam: &[f64], rho: f64) -> f64 {
    let mut m = f;
    for (gi, mi) in g.iter().zip(mu) {
        let s = (mi + rho * gi).max(0.0);
        m += (s * s - mi * mi) / (2.0 * rho);
    }
    for (hi, li) in h.iter().zip(lam) {
        m += li * hi + 0.5 * rho * hi * hi;
    }
    m
}

struct Evaluator<'a> {
    nlp: &'a dyn Nlp,
    mu: &'a [f64],
    lam: &'a [f64],
    rho: f64,
    g: Vec<f64>,
    h: Vec<f64>,
}

impl Evaluator<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        let f = self.nlp.evaluate(x, &mut self.g, &mut self.h);
        merit(f, &self.g, &self.h, self.mu, self.lam, self.rho)
    }

    fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (mu, lam, rho) = (self.mu, self.lam, self.rho);
        let mut weights = |g: &[f64], h: &[f64], wi: &mut [f64], we: &mut [f64]| {
            for ((w, gi), m) in wi.iter_mut().zip(g).zip(mu) {
                *w = (m + rho * gi).max(0.0);
            }
            for ((w, hi), l) in we.iter_mut().zip(h).zip(lam) {
                *w = l + rho * hi;
            }
        };
        let f = self
            .nlp
            .evaluate_with_gradient(x, &mut self.g, &mut self.h, &mut weights, grad);
        merit(f, &self.g, &self.h, mu, lam, rho)
    }
}

/// Projected L-BFGS on the augmented Lagrangian. Returns iterations used.
fn minimize_box(
    nlp: &dyn Nlp,
    x: &mut [f64],
    mu: &[f64],
    lam: &[f64],
    rho: f64,
    tol: f64,
    opts: &SolveOptions,
) -> usize {
    let n = x.len();
    let (lo, hi) = (nlp.lower(), nlp.upper());
    let mut ev = Evaluator {
        nlp,
        mu,
        lam,
        rho,
        g: vec![0.0; nlp.num_ineq()],
        h: vec![0.0; nlp.num_eq()],
    };
    let mut grad = vec![0.0; n];
    let mut f = ev.value_grad(x, &mut grad);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];
    let mut free = vec![true; n];
    let mut iters = 0;

    while iters < opts.max_inner {
        if projected_gradient_norm(x, &grad, lo, hi) <= tol {
            break;
        }
        iters += 1;
        for i in 0..n {
            let at_lo = x[i] <= lo[i] + 1e-12 && grad[i] > 0.0;
            let at_hi = x[i] >= hi[i] - 1e-12 && grad[i] < 0.0;
            free[i] = !(at_lo || at_hi) && hi[i] > lo[i];
        }
        two_loop(&grad, &free, &pairs, &mut dir);
        let mut slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        let mut steepest = pairs.is_empty();
        if slope >= 0.0 || !slope.is_finite() {
            for i in 0..n {
                dir[i] = if free[i] { -grad[i] } else { 0.0 };
            }
            slope = -dir.iter().map(|d| d * d).sum::<f64>();
            steepest = true;
            pairs.clear();
        }
        if slope == 0.0 {
            break;
        }
        let mut step = if steepest {
            let dmax = dir.iter().fold(0.0f64, |a, d| a.max(d.abs()));
            (1.0 / dmax).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..40 {
            let mut decrease = 0.0;
            for i in 0..n {
                trial[i] = (x[i] + step * dir[i]).clamp(lo[i], hi[i]);
                decrease += grad[i] * (trial[i] - x[i]);
            }
            if decrease >= 0.0 {
                step *= 0.5;
                continue;
            }
            let ft = ev.value(&trial);
            if ft.is_finite() && ft <= f + 1e-4 * decrease {
                accepted = Some(ft);
                break;
            }
            step *= 0.5;
        }
        let Some(_) = accepted else {
            if steepest {
                break;
            }
            pairs.clear();
            continue;
        };
        let ft = ev.value_grad(&trial, &mut trial_grad);
        let s: Vec<f64> = trial.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        if sy > 1e-12 * ss.max(1e-300) {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        x.copy_from_slice(&trial);
        grad.copy_from_slice(&trial_grad);
        let progress = f - ft;
        f = ft;
        if progress.abs() <= 1e-15 * f.abs().max(1.0) {
            break;
        }
    }
    iters
}

/// L-BFGS two-loop recursion restricted to the free variables.
fn two_loop(
    grad: &[f64],
    free: &[bool],
    pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    out: &mut [f64],
) {
    let masked_dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(free)
            .filter(|(_, &f)| f)
            .map(|((x, y), _)| x * y)
            .sum()
    };
    for (o, (g, &f)) in out.iter_mut().zip(grad.iter().zip(free)) {
        *o = if f { *g } else { 0.0 };
    }
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, _) in pairs.iter().rev() {
        let sy = masked_dot(s, y);
        if sy <= 1e-300 {
            alphas.push(0.0);
            continue;
        }
        let a = masked_dot(s, out) / sy;
        for i in 0..out.len() {
            if free[i] {
                out[i] -= a * y[i];
            }
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let sy = masked_dot(s, y);
        let yy = masked_dot(y, y);
        if sy > 1e-300 && yy > 1e-300 {
            let gamma = sy / yy;
            out.iter_mut().for_each(|o| *o *= gamma);
        }
    }
    for ((s, y, _), a) in pairs.iter().zip(alphas.iter().rev()) {
        let sy = masked_dot(s, y);
        if sy <= 1e-300 {
            continue;
        }
        let b = masked_dot(y, out) / sy;
        for i in 0..out.len() {
            if free[i] {
                out[i] += (a - b) * s[i];
            }
        }
    }
    out.iter_mut().for_each(|o| *o = -*o);
}
