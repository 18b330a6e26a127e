//! Smooth bound-constrained NLP interface.
//!
//! Problems have the form
//!
//! ```text
//! minimize f(x)  subject to  lower ≤ x ≤ upper,  g(x) ≤ 0,  h(x) = 0
//! ```
//!
//! Gradients are requested as a single weighted sum
//! `∇f + Σ w_g·∇g + Σ w_h·∇h`, which is all the augmented-Lagrangian solver
//! needs and lets adjoint-based evaluators stay at one backward pass.

/// Maps constraint values `(ineq, eq)` to gradient weights `(w_ineq, w_eq)`.
pub type WeightRule<'a> = dyn FnMut(&[f64], &[f64], &mut [f64], &mut [f64]) + 'a;

pub trait Nlp {
    fn dim(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    fn num_ineq(&self) -> usize;
    fn num_eq(&self) -> usize;

    /// Objective value; fills the constraint values.
    fn evaluate(&self, x: &[f64], ineq: &mut [f64], eq: &mut [f64]) -> f64;

    /// Writes `∇f + Σ w_ineq·∇g + Σ w_eq·∇h` into `grad`.
    fn weighted_gradient(&self, x: &[f64], w_ineq: &[f64], w_eq: &[f64], grad: &mut [f64]);

    /// Evaluates, picks the constraint weights from the constraint values,
    /// and returns the weighted gradient. Implementations may override this to
    /// share work between the two passes.
    fn evaluate_with_gradient(
        &self,
        x: &[f64],
        ineq: &mut [f64],
        eq: &mut [f64],
        weights: &mut WeightRule,
        grad: &mut [f64],
    ) -> f64 {
        let f = self.evaluate(x, ineq, eq);
        let mut wi = vec![0.0; self.num_ineq()];
        let mut we = vec![0.0; self.num_eq()];
        weights(ineq, eq, &mut wi, &mut we);
        self.weighted_gradient(x, &wi, &we, grad);
        f
    }
}

type ScalarFn<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;
type GradFn<'a> = Box<dyn Fn(&[f64], &mut [f64]) + 'a>;

/// NLP assembled from closures, mainly for tests and small problems.
pub struct FnNlp<'a> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: ScalarFn<'a>,
    gradient: GradFn<'a>,
    ineq: Vec<(ScalarFn<'a>, GradFn<'a>)>,
    eq: Vec<(ScalarFn<'a>, GradFn<'a>)>,
}

impl<'a> FnNlp<'a> {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        objective: impl Fn(&[f64]) -> f64 + 'a,
        gradient: impl Fn(&[f64], &mut [f64]) + 'a,
    ) -> Self {
        assert_eq!(lower.len(), upper.len(), "bounds differ in length");
        Self {
            lower,
            upper,
            objective: Box::new(objective),
            gradient: Box::new(gradient),
            ineq: Vec::new(),
            eq: Vec::new(),
        }
    }

    /// Adds `g(x) ≤ 0`.
    pub fn with_ineq(
        mut self,
        g: impl Fn(&[f64]) -> f64 + 'a,
        grad: impl Fn(&[f64], &mut [f64]) + 'a,
    ) -> Self {
        self.ineq.push((Box::new(g), Box::new(grad)));
        self
    }

    /// Adds `h(x) = 0`.
    pub fn with_eq(
        mut self,
        h: impl Fn(&[f64]) -> f64 + 'a,
        grad: impl Fn(&[f64], &mut [f64]) + 'a,
    ) -> Self {
        self.eq.push((Box::new(h), Box::new(grad)));
        self
    }
}

impl Nlp for FnNlp<'_> {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn num_ineq(&self) -> usize {
        self.ineq.len()
    }

    fn num_eq(&self) -> usize {
        self.eq.len()
    }

    fn evaluate(&self, x: &[f64], ineq: &mut [f64], eq: &mut [f64]) -> f64 {
        for (out, (g, _)) in ineq.iter_mut().zip(&self.ineq) {
            *out = g(x);
        }
        for (out, (h, _)) in eq.iter_mut().zip(&self.eq) {
            *out = h(x);
        }
        (self.objective)(x)
    }

    fn weighted_gradient(&self, x: &[f64], w_ineq: &[f64], w_eq: &[f64], grad: &mut [f64]) {
        (self.gradient)(x, grad);
        let mut tmp = vec![0.0; x.len()];
        for (w, (_, dg)) in w_ineq
            .iter()
            .zip(&self.ineq)
            .chain(w_eq.iter().zip(&self.eq))
        {
            if *w == 0.0 {
                continue;
            }
            dg(x, &mut tmp);
            for (g, t) in grad.iter_mut().zip(&tmp) {
                *g += w * t;
            }
        }
    }
}
