//! Natural cubic spline with analytic first and second derivatives.

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends.
    curvature: Vec<f64>,
}

impl CubicSpline {
    /// Builds the spline; `knots` must be strictly increasing with at least
    /// two entries and the same length as `values`.
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(knots.len(), values.len(), "knot/value length mismatch");
        assert!(knots.len() >= 2, "spline needs at least two knots");
        let n = knots.len();
        let mut curvature = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior curvatures (Thomas algorithm).
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0
                    * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut solution = vec![0.0; m];
            solution[m - 1] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                solution[i] = (rhs[i] - upper[i] * solution[i + 1]) / diag[i];
            }
            curvature[1..n - 1].copy_from_slice(&solution);
        }
        Self {
            knots,
            values,
            curvature,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn segment(&self, x: f64) -> usize {
        let last = self.knots.len() - 2;
        match self.knots.partition_point(|&k| k <= x) {
            0 => 0,
            i => (i - 1).min(last),
        }
    }

    /// Value, first and second derivative at `x`.
    pub fn eval_with_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let i = self.segment(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let slope = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let curvature = a * m0 + b * m1;
        (value, slope, curvature)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivatives(x).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knots() {
        let xs = vec![0.0, 0.5, 1.3, 2.0, 3.1];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.sin()).collect();
        let s = CubicSpline::natural(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_data_is_exact() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64 * 0.7).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x).collect();
        let s = CubicSpline::natural(xs, ys);
        let (v, d, c) = s.eval_with_derivatives(1.234);
        assert!((v - (2.0 - 3.0 * 1.234)).abs() < 1e-14);
        assert!((d + 3.0).abs() < 1e-13);
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn second_derivative_is_continuous_at_knots() {
        let xs: Vec<f64> = (0..8).map(|i| (i as f64).powf(1.3)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (0.4 * x).cos()).collect();
        let s = CubicSpline::natural(xs.clone(), ys);
        for &k in &xs[1..xs.len() - 1] {
            let left = s.eval_with_derivatives(k - 1e-12).2;
            let right = s.eval_with_derivatives(k + 1e-12).2;
            assert!((left - right).abs() < 1e-9);
        }
    }
}
