//! Fixed-rule quadratures.
//!
//! [`TanhSinh`] carries each abscissa as a pair of distances to the two
//! endpoints so integrands with inverse-square-root endpoint behaviour can be
//! evaluated without cancellation. [`GaussLegendre`] is used for smooth
//! integrands after a regularising substitution.

use std::f64::consts::{FRAC_PI_2, PI};

/// Truncation of the tanh-sinh parameter range. At t = 4.5 the outermost
/// abscissa sits about 1e-61 (relative) from the endpoint.
const T_MAX: f64 = 4.5;

#[derive(Debug, Clone, Copy)]
struct TsNode {
    from_left: f64,
    from_right: f64,
    weight: f64,
}

/// Double-exponential rule on a generic interval, built once and reused.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    nodes: Vec<TsNode>,
}

impl TanhSinh {
    /// Builds a rule with roughly `n` abscissas (`2·(n/2) + 1`).
    pub fn new(n: usize) -> Self {
        let half = (n / 2).max(8);
        let h = T_MAX / half as f64;
        let mut nodes = Vec::with_capacity(2 * half + 1);
        for k in -(half as i64)..=(half as i64) {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let from_left = 1.0 / (1.0 + (-2.0 * u).exp());
            let from_right = 1.0 / (1.0 + (2.0 * u).exp());
            let sech = 2.0 / (u.exp() + (-u).exp());
            let weight = h * 0.25 * PI * t.cosh() * sech * sech;
            nodes.push(TsNode {
                from_left,
                from_right,
                weight,
            });
        }
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Visits every abscissa of the rule mapped to `[a, b]` as
    /// `(x, x - a, b - x, weight)`, with weights already scaled to the
    /// interval.
    pub fn for_each_node<F>(&self, a: f64, b: f64, mut f: F)
    where
        F: FnMut(f64, f64, f64, f64),
    {
        let width = b - a;
        if width == 0.0 {
            return;
        }
        for node in &self.nodes {
            if node.weight == 0.0 {
                continue;
            }
            let dl = width * node.from_left;
            let dr = width * node.from_right;
            let x = if dl <= dr { a + dl } else { b - dr };
            f(x, dl, dr, node.weight * width);
        }
    }

    /// Integrates `f(x, x - a, b - x)` over `[a, b]`.
    ///
    /// The distances are computed directly from the rule, never as
    /// differences of nearby abscissas. Non-finite integrand values are
    /// dropped; they only arise where the weight has already underflowed.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> f64
    where
        F: FnMut(f64, f64, f64) -> f64,
    {
        let width = b - a;
        if width == 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        for node in &self.nodes {
            if node.weight == 0.0 {
                continue;
            }
            let dl = width * node.from_left;
            let dr = width * node.from_right;
            let x = if dl <= dr { a + dl } else { b - dr };
            let v = f(x, dl, dr);
            if v.is_finite() {
                sum += node.weight * v;
            }
        }
        sum * width
    }
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let step = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * step;
                let hi = if k + 1 == panels { b } else { lo + step };
                self.integrate(lo, hi, &mut f)
            })
            .sum()
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_handles_inverse_sqrt_endpoints() {
        // ∫_0^1 dx / sqrt(x(1-x)) = π
        let rule = TanhSinh::new(256);
        let v = rule.integrate(0.0, 1.0, |_, dl, dr| 1.0 / (dl * dr).sqrt());
        assert!((v - PI).abs() < 1e-13, "{v}");
    }

    #[test]
    fn tanh_sinh_smooth_polynomial() {
        let rule = TanhSinh::new(64);
        let v = rule.integrate(-1.0, 2.0, |x, _, _| x * x * x - x);
        assert!((v - 2.25).abs() < 1e-13, "{v}");
    }

    #[test]
    fn gauss_legendre_exact_for_degree_2n_minus_1() {
        let rule = GaussLegendre::new(6);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_composite_sine() {
        let rule = GaussLegendre::new(10);
        let v = rule.integrate_composite(0.0, PI, 4, f64::sin);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
