//! Cubic splines through tabulated data.

use crate::error::{Error, Result};

/// End condition for [`CubicSpline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndCondition {
    Natural,
    /// Prescribed first derivatives at the two ends.
    Clamped(f64, f64),
}

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>, end: EndCondition) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InvalidParameter(
                "spline needs at least three (x, y) pairs of equal length".into(),
            ));
        }
        if let Some(i) =
            (1..n).find(|&i| x[i].partial_cmp(&x[i - 1]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidParameter(format!(
                "abscissas must be strictly increasing (row {})",
                i + 1
            )));
        }
        // Tridiagonal system for the knot second derivatives.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            sub[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        match end {
            EndCondition::Natural => {
                diag[0] = 1.0;
                diag[n - 1] = 1.0;
            }
            EndCondition::Clamped(d0, d1) => {
                let h0 = x[1] - x[0];
                diag[0] = h0 / 3.0;
                sup[0] = h0 / 6.0;
                rhs[0] = (y[1] - y[0]) / h0 - d0;
                let hn = x[n - 1] - x[n - 2];
                sub[n - 1] = hn / 6.0;
                diag[n - 1] = hn / 3.0;
                rhs[n - 1] = d1 - (y[n - 1] - y[n - 2]) / hn;
            }
        }
        // Thomas algorithm; the system is diagonally dominant.
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(Self { x, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Value, first and second derivative at `t` (cubic extrapolation
    /// outside the knot range).
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamped_spline_reproduces_cubic() {
        let x: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let f = |t: f64| t * t * t - 2.0 * t;
        let y = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::new(x, y, EndCondition::Clamped(-2.0, 3.0 * 3.5 * 3.5 - 2.0)).unwrap();
        let (v, d, dd) = s.eval_all(1.3);
        assert!((v - f(1.3)).abs() < 1e-12);
        assert!((d - (3.0 * 1.69 - 2.0)).abs() < 1e-12);
        assert!((dd - 7.8).abs() < 1e-11);
    }

    #[test]
    fn rejects_non_increasing_abscissa() {
        let err =
            CubicSpline::new(vec![0.0, 1.0, 0.5], vec![0.0; 3], EndCondition::Natural).unwrap_err();
        assert!(err.to_string().contains("row 3"));
    }
}
