//! First-order optimality residuals.

use super::nlp::Nlp;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktReport {
    /// `‖P(x − ∇L) − x‖∞`, the projected Lagrangian gradient
    pub stationarity: f64,
    /// Largest inequality excess or equality residual
    pub feasibility: f64,
    /// Largest `|min(μ_i, −g_i)|`
    pub complementarity: f64,
}

impl KktReport {
    pub fn residual(&self) -> f64 {
        self.stationarity
            .max(self.feasibility)
            .max(self.complementarity)
    }

    pub fn satisfied(&self, tol: f64) -> bool {
        self.residual() <= tol
    }
}

/// Residuals of the KKT conditions at `x` with inequality multipliers
/// `mult_ineq ≥ 0` and equality multipliers `mult_eq`.
pub fn check_kkt(nlp: &dyn Nlp, x: &[f64], mult_ineq: &[f64], mult_eq: &[f64]) -> KktReport {
    assert_eq!(x.len(), nlp.dim());
    assert_eq!(mult_ineq.len(), nlp.num_ineq());
    assert_eq!(mult_eq.len(), nlp.num_eq());
    let mut g = vec![0.0; nlp.num_ineq()];
    let mut h = vec![0.0; nlp.num_eq()];
    nlp.evaluate(x, &mut g, &mut h);
    let mut grad = vec![0.0; x.len()];
    let clipped: Vec<f64> = mult_ineq.iter().map(|m| m.max(0.0)).collect();
    nlp.weighted_gradient(x, &clipped, mult_eq, &mut grad);
    let stationarity = projected_gradient_norm(x, &grad, nlp.lower(), nlp.upper());
    let feasibility = g
        .iter()
        .map(|v| v.max(0.0))
        .chain(h.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    let complementarity = mult_ineq
        .iter()
        .zip(&g)
        .map(|(m, gi)| m.min(-gi).abs())
        .fold(0.0, f64::max);
    KktReport {
        stationarity,
        feasibility,
        complementarity,
    }
}

/// `‖P(x − g) − x‖∞` for the box `[lower, upper]`.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((xi, gi), (lo, hi))| ((xi - gi).clamp(*lo, *hi) - xi).abs())
        .fold(0.0, f64::max)
}
