//! Backward dynamic programming over a rectilinear state grid with a finite
//! control set. Used as a global-optimality reference on small instances.

use crate::error::{Error, Result};

/// Largest allowed `grid points × controls` per stage.
pub const MAX_GRID_WORK: usize = 1_000_000;

/// Deterministic multistage problem with indexed controls.
pub trait DpProblem {
    fn stages(&self) -> usize;
    fn num_controls(&self) -> usize;
    /// Stage cost of applying `control` in `state` at `stage`, writing the
    /// successor to `next`. `None` marks the transition infeasible.
    fn step(&self, stage: usize, state: &[f64], control: usize, next: &mut [f64]) -> Option<f64>;
    /// Cost of ending in `state`; `None` if not allowed.
    fn terminal_cost(&self, state: &[f64]) -> Option<f64>;
}

/// Tensor grid; each axis must be strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
    size: usize,
}

impl StateGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter(
                "grid needs at least one axis".into(),
            ));
        }
        for a in &axes {
            if a.is_empty() || a.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(
                    "grid axes must be non-empty and strictly increasing".into(),
                ));
            }
        }
        let mut strides = vec![1; axes.len()];
        for d in (0..axes.len() - 1).rev() {
            strides[d] = strides[d + 1] * axes[d + 1].len();
        }
        let size = strides[0] * axes[0].len();
        Ok(Self {
            axes,
            strides,
            size,
        })
    }

    /// Evenly spaced axis helper.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    fn point(&self, mut index: usize, out: &mut [f64]) {
        for (d, o) in out.iter_mut().enumerate().take(self.axes.len()) {
            let i = index / self.strides[d];
            index %= self.strides[d];
            *o = self.axes[d][i];
        }
    }

    /// Multilinear interpolation of `values`. Points off the grid evaluate
    /// to infinity. Infinite corners of the enclosing cell are dropped and
    /// the remaining weights renormalized, so a cell is infinite only when
    /// every corner with positive weight is.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let dims = self.axes.len();
        let mut base = 0;
        let mut frac = [0.0f64; 8];
        let mut step = [0usize; 8];
        assert!(dims <= 8, "at most 8 grid dimensions");
        for d in 0..dims {
            let a = &self.axes[d];
            let v = x[d];
            let last = a.len() - 1;
            if !(v >= a[0] - 1e-12 && v <= a[last] + 1e-12) {
                return f64::INFINITY;
            }
            if last == 0 {
                step[d] = 0;
                continue;
            }
            let i = match a.partition_point(|&p| p <= v) {
                0 => 0,
                k => (k - 1).min(last - 1),
            };
            frac[d] = ((v - a[i]) / (a[i + 1] - a[i])).clamp(0.0, 1.0);
            base += i * self.strides[d];
            step[d] = self.strides[d];
        }
        let mut acc = 0.0;
        let mut weight = 0.0;
        for corner in 0..(1usize << dims) {
            let mut w = 1.0;
            let mut idx = base;
            for d in 0..dims {
                if corner >> d & 1 == 1 {
                    w *= frac[d];
                    idx += step[d];
                } else {
                    w *= 1.0 - frac[d];
                }
            }
            if w <= 0.0 {
                continue;
            }
            let v = values[idx];
            if v.is_finite() {
                acc += w * v;
                weight += w;
            }
        }
        if weight > 0.0 {
            acc / weight
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone)]
pub struct DpSolution {
    pub grid: StateGrid,
    /// Cost-to-go on the grid for stages `0..=N`
    pub value: Vec<Vec<f64>>,
}

impl DpSolution {
    /// Interpolated cost-to-go at `stage`.
    pub fn value_at(&self, stage: usize, state: &[f64]) -> f64 {
        self.grid.interpolate(&self.value[stage], state)
    }

    /// Best control and its one-step lookahead cost at an arbitrary state.
    pub fn best_control(
        &self,
        problem: &dyn DpProblem,
        stage: usize,
        state: &[f64],
    ) -> Option<(usize, f64)> {
        let mut next = vec![0.0; state.len()];
        let mut best: Option<(usize, f64)> = None;
        for c in 0..problem.num_controls() {
            let Some(cost) = problem.step(stage, state, c, &mut next) else {
                continue;
            };
            let total = cost + self.value_at(stage + 1, &next);
            if total.is_finite() && best.is_none_or(|(_, b)| total < b) {
                best = Some((c, total));
            }
        }
        best
    }

    /// Optimal cost from `state` at stage 0, minimizing over controls at the
    /// exact state rather than interpolating the stage-0 table.
    pub fn optimal_cost(&self, problem: &dyn DpProblem, state: &[f64]) -> f64 {
        self.best_control(problem, 0, state)
            .map_or(f64::INFINITY, |(_, v)| v)
    }

    /// Forward rollout of the lookahead policy. Returns total cost and the
    /// controls used, or `None` if it runs into an infeasible state.
    pub fn rollout(&self, problem: &dyn DpProblem, state: &[f64]) -> Option<(f64, Vec<usize>)> {
        let mut x = state.to_vec();
        let mut next = x.clone();
        let mut total = 0.0;
        let mut controls = Vec::with_capacity(problem.stages());
        for k in 0..problem.stages() {
            let (c, _) = self.best_control(problem, k, &x)?;
            total += problem.step(k, &x, c, &mut next)?;
            std::mem::swap(&mut x, &mut next);
            controls.push(c);
        }
        Some((total + problem.terminal_cost(&x)?, controls))
    }
}

/// Backward recursion `V_N = terminal`, `V_k(x) = min_u [ℓ_k(x,u) + V_{k+1}(f(x,u))]`.
pub fn dp_oracle(problem: &dyn DpProblem, grid: StateGrid) -> Result<DpSolution> {
    let work = grid.len().saturating_mul(problem.num_controls());
    if work > MAX_GRID_WORK {
        return Err(Error::GridTooLarge {
            size: work,
            limit: MAX_GRID_WORK,
        });
    }
    let n = problem.stages();
    let dims = grid.dims();
    let mut x = vec![0.0; dims];
    let mut next = vec![0.0; dims];
    let mut value = vec![Vec::new(); n + 1];
    value[n] = (0..grid.len())
        .map(|i| {
            grid.point(i, &mut x);
            problem.terminal_cost(&x).unwrap_or(f64::INFINITY)
        })
        .collect();
    for k in (0..n).rev() {
        let later = &value[k + 1];
        let here: Vec<f64> = (0..grid.len())
            .map(|i| {
                grid.point(i, &mut x);
                let mut best = f64::INFINITY;
                for c in 0..problem.num_controls() {
                    if let Some(cost) = problem.step(k, &x, c, &mut next) {
                        let total = cost + grid.interpolate(later, &next);
                        if total < best {
                            best = total;
                        }
                    }
                }
                best
            })
            .collect();
        value[k] = here;
    }
    Ok(DpSolution { grid, value })
}
