//! Fully normalised associated Legendre functions.
//!
//! `P̄_ℓ^m(x)` is scaled so that `Y_ℓ^m(r, θ) = P̄_ℓ^m(cos r) e^{imθ}` has unit
//! `L²` norm on the round sphere. The three-term recurrence in `ℓ` is run
//! directly on the normalised values, which stays in range for degrees in
//! the thousands.

use std::f64::consts::PI;

/// `P̄_ℓ^{|m|}(x)` with the Condon–Shortley phase, for `|x| ≤ 1`.
pub fn normalized_assoc(ell: usize, m: i64, x: f64) -> f64 {
    let m = m.unsigned_abs() as usize;
    if m > ell {
        return 0.0;
    }
    let s2 = (1.0 - x * x).max(0.0);
    // P̄_m^m = (-1)^m √((2m+1)/(4π) Π (2k-1)/(2k)) (1-x²)^{m/2}
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf) * s2).sqrt();
    }
    if ell == m {
        return pmm;
    }
    let mf = m as f64;
    let coeff = |l: f64| ((4.0 * l * l - 1.0) / (l * l - mf * mf)).sqrt();
    let mut prev = pmm;
    let mut cur = x * (2.0 * mf + 3.0).sqrt() * pmm;
    for l in (m + 2)..=ell {
        let lf = l as f64;
        let next = coeff(lf) * (x * cur - prev / coeff(lf - 1.0));
        prev = cur;
        cur = next;
    }
    cur
}

/// Squared `L²` norm over the equator of the unit-norm spherical harmonic
/// `Y_ℓ^m`, `2π |P̄_ℓ^m(0)|²`.
pub fn sphere_restricted_norm(ell: usize, m: i64) -> f64 {
    let p = normalized_assoc(ell, m, 0.0);
    2.0 * PI * p * p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        let x: f64 = 0.3;
        let n = |v: f64| v.sqrt();
        assert!((normalized_assoc(0, 0, x) - n(1.0 / (4.0 * PI))).abs() < 1e-15);
        assert!((normalized_assoc(1, 0, x) - n(3.0 / (4.0 * PI)) * x).abs() < 1e-15);
        let y21 = -n(15.0 / (8.0 * PI)) * x * (1.0 - x * x).sqrt();
        assert!((normalized_assoc(2, 1, x) - y21).abs() < 1e-15);
        let y20 = n(5.0 / (16.0 * PI)) * (3.0 * x * x - 1.0);
        assert!((normalized_assoc(2, -0, x) - y20).abs() < 1e-15);
        assert_eq!(normalized_assoc(2, 3, x), 0.0);
    }

    #[test]
    fn equator_norms() {
        assert!((sphere_restricted_norm(1, 1) - 0.75).abs() < 1e-15);
        assert!((sphere_restricted_norm(1, -1) - 0.75).abs() < 1e-15);
        assert!((sphere_restricted_norm(2, 0) - 0.625).abs() < 1e-15);
        assert_eq!(sphere_restricted_norm(2, 1), 0.0);
    }

    #[test]
    fn addition_theorem_on_the_equator() {
        // Σ_m |Y_ℓ^m|² = (2ℓ+1)/(4π) at every point.
        for ell in [5usize, 40, 300] {
            let s: f64 = (-(ell as i64)..=ell as i64)
                .map(|m| normalized_assoc(ell, m, 0.0).powi(2))
                .sum();
            let want = (2 * ell + 1) as f64 / (4.0 * PI);
            assert!((s - want).abs() < 1e-12 * want, "ell = {ell}");
        }
    }
}
