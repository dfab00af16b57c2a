//! Chebyshev interpolation on an interval: barycentric evaluation from
//! samples at Chebyshev–Lobatto points, and coefficient series with exact
//! antiderivatives.

use std::f64::consts::PI;

/// Chebyshev–Lobatto points `x_j = mid + half·cos(jπ/n)`, `j = 0..=n`.
pub fn lobatto_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..=n)
        .map(|j| {
            if j == 0 {
                b
            } else if j == n {
                a
            } else {
                mid + half * (j as f64 * PI / n as f64).cos()
            }
        })
        .collect()
}

/// Barycentric interpolant through values at Chebyshev–Lobatto points.
#[derive(Debug, Clone)]
pub struct Barycentric {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl Barycentric {
    pub fn from_fn<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> Self {
        let points = lobatto_points(a, b, n);
        let values = points.iter().map(|&x| f(x)).collect();
        Self { points, values }
    }

    pub fn from_values(a: f64, b: f64, values: Vec<f64>) -> Self {
        let n = values.len() - 1;
        Self {
            points: lobatto_points(a, b, n),
            values,
        }
    }

    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.degree();
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&xj, &fj)) in self.points.iter().zip(&self.values).enumerate() {
            let diff = x - xj;
            if diff == 0.0 {
                return fj;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            let t = w / diff;
            num += t * fj;
            den += t;
        }
        num / den
    }
}

/// Truncated Chebyshev series `Σ c_k T_k(s)` with `s` the affine image of
/// `[a, b]` on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct ChebSeries {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl ChebSeries {
    /// Interpolates `f` at `n + 1` Lobatto points.
    pub fn from_fn<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> Self {
        let points = lobatto_points(a, b, n);
        let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
        Self::from_lobatto_values(a, b, &values)
    }

    /// Coefficients from samples at `lobatto_points(a, b, n)` (DCT-I).
    pub fn from_lobatto_values(a: f64, b: f64, values: &[f64]) -> Self {
        let n = values.len() - 1;
        let nf = n as f64;
        let mut coeffs = vec![0.0; n + 1];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, &v) in values.iter().enumerate() {
                let mut term = v * ((j * k) as f64 * PI / nf).cos();
                if j == 0 || j == n {
                    term *= 0.5;
                }
                s += term;
            }
            let mut c = 2.0 * s / nf;
            if k == 0 || k == n {
                c *= 0.5;
            }
            *ck = c;
        }
        Self { a, b, coeffs }
    }

    /// Interpolates `f` at the `n` Chebyshev points of the first kind,
    /// which avoid both endpoints.
    pub fn from_fn_interior<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> Self {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let nf = n as f64;
        let angles: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * PI / nf).collect();
        let values: Vec<f64> = angles.iter().map(|&th| f(mid + half * th.cos())).collect();
        let coeffs = (0..n)
            .map(|k| {
                let s: f64 = angles
                    .iter()
                    .zip(&values)
                    .map(|(&th, &v)| v * (k as f64 * th).cos())
                    .sum();
                if k == 0 {
                    s / nf
                } else {
                    2.0 * s / nf
                }
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * s * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        s * b1 - b2 + self.coeffs[0]
    }

    /// Antiderivative vanishing at the left end of the domain.
    pub fn antiderivative(&self) -> ChebSeries {
        let n = self.coeffs.len();
        let scale = 0.5 * (self.b - self.a);
        let c = |k: usize| if k < n { self.coeffs[k] } else { 0.0 };
        let mut out = vec![0.0; n + 1];
        for (k, o) in out.iter_mut().enumerate().skip(1) {
            let kf = k as f64;
            let prev = if k == 1 { 2.0 * c(0) } else { c(k - 1) };
            *o = scale * (prev - c(k + 1)) / (2.0 * kf);
        }
        let mut series = ChebSeries {
            a: self.a,
            b: self.b,
            coeffs: out,
        };
        let left = series.eval(self.a);
        series.coeffs[0] -= left;
        series
    }

    /// Largest magnitude among the trailing `count` coefficients.
    pub fn tail(&self, count: usize) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .take(count)
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Piecewise Chebyshev representation of a function on `[0, T]` whose
/// panels shrink geometrically towards 0, with cumulative integrals.
///
/// Samples are taken at interior Chebyshev points only, so the function is
/// never evaluated at either end of the range.
#[derive(Debug, Clone)]
pub struct GradedTable {
    upper: f64,
    /// Panels ordered from 0 upward, with the integral over all panels
    /// below each one.
    panels: Vec<(ChebSeries, ChebSeries, f64)>,
    total: f64,
}

impl GradedTable {
    pub fn build<F: FnMut(f64) -> f64>(
        upper: f64,
        levels: usize,
        ratio: f64,
        degree: usize,
        mut f: F,
    ) -> Self {
        let mut breaks = vec![0.0];
        for k in (0..levels).rev() {
            breaks.push(upper * ratio.powi(k as i32 + 1));
        }
        breaks.push(upper);
        let mut panels = Vec::with_capacity(breaks.len() - 1);
        let mut below = 0.0;
        for w in breaks.windows(2) {
            let series = ChebSeries::from_fn_interior(w[0], w[1], degree, &mut f);
            let anti = series.antiderivative();
            let piece = anti.eval(w[1]);
            panels.push((series, anti, below));
            below += piece;
        }
        Self {
            upper,
            panels,
            total: below,
        }
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `∫_0^T f`.
    pub fn total(&self) -> f64 {
        self.total
    }

    fn panel(&self, t: f64) -> &(ChebSeries, ChebSeries, f64) {
        let idx = self
            .panels
            .partition_point(|(s, _, _)| s.domain().1 < t)
            .min(self.panels.len() - 1);
        &self.panels[idx]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.panel(t.clamp(0.0, self.upper))
            .0
            .eval(t.clamp(0.0, self.upper))
    }

    /// `∫_0^t f` for `t` in `[0, T]`.
    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.upper {
            return self.total;
        }
        let (_, anti, below) = self.panel(t);
        below + anti.eval(t)
    }

    /// Largest trailing coefficient over all panels.
    pub fn tail(&self) -> f64 {
        self.panels
            .iter()
            .fold(0.0_f64, |m, (s, _, _)| m.max(s.tail(3)))
    }
}
