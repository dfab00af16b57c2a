//! Bracketing root finders.

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign.
///
/// Runs until the bracket stops shrinking in floating point or its width
/// drops below `tol`. Returns `None` when the bracket is invalid.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Outcome of [`newton_bracketed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRoot {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Safeguarded Newton for an increasing function on `[lo, hi]` with
/// `f(lo) < 0 < f(hi)`. `fdf` returns `(f, f')`. Steps leaving the current
/// bracket are replaced by bisection.
pub fn newton_bracketed<F>(mut fdf: F, lo: f64, hi: f64, start: f64, tol: f64) -> NewtonRoot
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (lo, hi);
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    let mut best = NewtonRoot {
        root: x,
        residual: f64::INFINITY,
        iterations: 0,
    };
    for it in 1..=200 {
        let (fx, dfx) = fdf(x);
        if fx.abs() < best.residual.abs() || !best.residual.is_finite() {
            best = NewtonRoot {
                root: x,
                residual: fx,
                iterations: it,
            };
        }
        if fx.abs() <= tol {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
        x = next;
    }
    best
}
