//! Piecewise-linear and monotone cubic lookup tables.

/// Borrowed 1-D table with strictly increasing knots. Queries outside the knot
/// range are clamped to the end values.
#[derive(Debug, Clone, Copy)]
pub struct Table1<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
}

impl<'a> Table1<'a> {
    pub fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        debug_assert_eq!(xs.len(), ys.len());
        debug_assert!(!xs.is_empty());
        Self { xs, ys }
    }

    /// Index `i` of the segment `[x_i, x_{i+1})` holding `x`.
    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_slope(x).0
    }

    /// Value and right-hand slope. The slope is zero in the clamped region.
    pub fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        if n == 1 {
            return (self.ys[0], 0.0);
        }
        if x <= self.xs[0] {
            return (self.ys[0], 0.0);
        }
        if x >= self.xs[n - 1] {
            return (self.ys[n - 1], 0.0);
        }
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let slope = (y1 - y0) / (x1 - x0);
        (y0 + slope * (x - x0), slope)
    }
}

/// Shape-preserving cubic Hermite interpolant (PCHIP) over borrowed knots.
///
/// Knot slopes use the weighted harmonic mean of adjacent secants, so the
/// curve is C¹ and never overshoots monotone data. Outside the knot range the
/// end segments are extended linearly with the end slopes.
#[derive(Debug, Clone, Copy)]
pub struct Pchip<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
}

impl<'a> Pchip<'a> {
    pub fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        debug_assert_eq!(xs.len(), ys.len());
        debug_assert!(xs.len() >= 2);
        Self { xs, ys }
    }

    fn secant(&self, i: usize) -> f64 {
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    fn knot_slope(&self, i: usize) -> f64 {
        let n = self.xs.len();
        if n == 2 {
            return self.secant(0);
        }
        let h = |k: usize| self.xs[k + 1] - self.xs[k];
        if i == 0 || i == n - 1 {
            // one-sided three-point estimate, limited to keep the shape
            let (a, b) = if i == 0 { (0, 1) } else { (n - 2, n - 3) };
            let (ha, hb) = (h(a), h(b));
            let (da, db) = (self.secant(a), self.secant(b));
            let d = ((2.0 * ha + hb) * da - ha * db) / (ha + hb);
            if d.signum() != da.signum() {
                0.0
            } else if da.signum() != db.signum() && d.abs() > 3.0 * da.abs() {
                3.0 * da
            } else {
                d
            }
        } else {
            let (d0, d1) = (self.secant(i - 1), self.secant(i));
            if d0 * d1 <= 0.0 {
                return 0.0;
            }
            let (h0, h1) = (h(i - 1), h(i));
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            (w1 + w2) / (w1 / d0 + w2 / d1)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_slope(x).0
    }

    pub fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        if x <= self.xs[0] {
            let d = self.knot_slope(0);
            return (self.ys[0] + d * (x - self.xs[0]), d);
        }
        if x >= self.xs[n - 1] {
            let d = self.knot_slope(n - 1);
            return (self.ys[n - 1] + d * (x - self.xs[n - 1]), d);
        }
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.knot_slope(i) * h, self.knot_slope(i + 1) * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let slope = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (value, slope)
    }
}
