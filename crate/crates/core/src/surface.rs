//! Meridian profiles of convex surfaces of revolution.
//!
//! A profile is the function `a(r)` in the metric `dr² + a(r)² dθ²`, with
//! `r` the arclength from the north pole, together with the pole-to-pole
//! length `L` and the equator `r₀` where `a` attains its unique maximum.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{bisect, Barycentric, ChebSeries, CubicSpline, EndCondition};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Samples used by the validator and by the equator search.
const VALIDATION_GRID: usize = 10_000;

#[derive(Clone)]
enum Meridian {
    RoundSphere,
    Ellipsoid(EllipsoidMeridian),
    Custom {
        a: ScalarFn,
        a1: ScalarFn,
        a2: ScalarFn,
    },
    Table(CubicSpline),
}

/// Arclength-parametrised meridian of `x² + y² + z²/q² = 1`.
///
/// The meridian is `(sin t, q cos t)`; the map `r ↦ t` is tabulated at
/// Chebyshev points in `r` and evaluated barycentrically, after which
/// `a`, `a'`, `a''` follow in closed form from `t`.
#[derive(Clone)]
struct EllipsoidMeridian {
    aspect: f64,
    t_of_r: Barycentric,
}

impl EllipsoidMeridian {
    fn speed(aspect: f64, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        (c * c + aspect * aspect * s * s).sqrt()
    }

    fn build(aspect: f64) -> Result<(Self, f64)> {
        // r(t) = ∫_0^t speed, as an integrated Chebyshev series.
        let mut n = 32;
        let speed = loop {
            let s = ChebSeries::from_fn(0.0, PI, n, |t| Self::speed(aspect, t));
            if s.tail(3) < 1e-16 * aspect.max(1.0) || n >= 8192 {
                break s;
            }
            n *= 2;
        };
        let arclength = speed.antiderivative();
        let length = arclength.eval(PI);

        let invert = |r: f64| -> f64 {
            if r <= 0.0 {
                return 0.0;
            }
            if r >= length {
                return PI;
            }
            let mut t = PI * r / length;
            for _ in 0..60 {
                let step = (arclength.eval(t) - r) / Self::speed(aspect, t);
                t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            t.clamp(0.0, PI)
        };

        let mut n = 32;
        let mut current = Barycentric::from_fn(0.0, length, n, invert);
        loop {
            let finer = Barycentric::from_fn(0.0, length, 2 * n, invert);
            let err = (0..200)
                .map(|k| {
                    let r = length * (k as f64 + 0.37) / 200.0;
                    (finer.eval(r) - current.eval(r)).abs()
                })
                .fold(0.0_f64, f64::max);
            current = finer;
            n *= 2;
            if err < 1e-14 || n >= 8192 {
                break;
            }
        }
        if !length.is_finite() {
            return Err(Error::Numerical("ellipsoid arclength is not finite".into()));
        }
        Ok((
            Self {
                aspect,
                t_of_r: current,
            },
            length,
        ))
    }

    fn eval_all(&self, r: f64) -> (f64, f64, f64) {
        let t = self.t_of_r.eval(r);
        let (sin_t, cos_t) = t.sin_cos();
        let q2 = self.aspect * self.aspect;
        let speed2 = cos_t * cos_t + q2 * sin_t * sin_t;
        let speed = speed2.sqrt();
        (sin_t, cos_t / speed, -q2 * sin_t / (speed2 * speed2))
    }
}

/// Meridian profile `a(r)` on `[0, L]` with its equator.
#[derive(Clone)]
pub struct SurfaceProfile {
    name: String,
    length: f64,
    r0: f64,
    a_r0: f64,
    meridian: Meridian,
}

impl fmt::Debug for SurfaceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceProfile")
            .field("name", &self.name)
            .field("length", &self.length)
            .field("r0", &self.r0)
            .field("a_r0", &self.a_r0)
            .finish()
    }
}

impl SurfaceProfile {
    /// The unit sphere, `a(r) = sin r`.
    pub fn round_sphere() -> Self {
        Self {
            name: "round_sphere".into(),
            length: PI,
            r0: 0.5 * PI,
            a_r0: 1.0,
            meridian: Meridian::RoundSphere,
        }
    }

    /// Ellipsoid of revolution `x² + y² + z²/aspect² = 1`.
    pub fn ellipsoid(aspect: f64) -> Result<Self> {
        if !(aspect > 0.0) || !aspect.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ellipsoid aspect must be positive, got {aspect}"
            )));
        }
        let (meridian, length) = EllipsoidMeridian::build(aspect)?;
        let profile = Self::locate_equator(
            format!("ellipsoid(aspect={aspect})"),
            length,
            Meridian::Ellipsoid(meridian),
        );
        profile.accept()
    }

    /// Profile from user-supplied `a`, `a'`, `a''`; rejected unless every
    /// invariant holds.
    pub fn custom(
        name: &str,
        a: ScalarFn,
        a1: ScalarFn,
        a2: ScalarFn,
        length: f64,
    ) -> Result<Self> {
        Self::custom_unchecked(name, a, a1, a2, length)?.accept()
    }

    /// Same as [`SurfaceProfile::custom`] without the validation gate, so a
    /// failing profile can still be inspected with [`SurfaceProfile::validate`].
    pub fn custom_unchecked(
        name: &str,
        a: ScalarFn,
        a1: ScalarFn,
        a2: ScalarFn,
        length: f64,
    ) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "profile length must be positive, got {length}"
            )));
        }
        Ok(Self::locate_equator(
            name.to_string(),
            length,
            Meridian::Custom { a, a1, a2 },
        ))
    }

    /// Profile interpolated from a table of `(r, a(r))` with `r` strictly
    /// increasing from 0 to `L`. The spline is clamped to the smooth pole
    /// slopes `a'(0) = 1`, `a'(L) = -1`.
    pub fn from_table(name: &str, r: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        Self::from_table_unchecked(name, r, a)?.accept()
    }

    /// [`SurfaceProfile::from_table`] without the validation gate. Malformed
    /// tables (too short, not starting at 0, non-increasing `r`) are still
    /// rejected.
    pub fn from_table_unchecked(name: &str, r: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if r.len() < 4 {
            return Err(Error::InvalidParameter(
                "profile table needs at least four rows".into(),
            ));
        }
        if r[0] != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "profile table must start at r = 0 (row 1 has r = {})",
                r[0]
            )));
        }
        let length = *r.last().unwrap();
        let spline = CubicSpline::new(r, a, EndCondition::Clamped(1.0, -1.0))?;
        Ok(Self::locate_equator(
            name.to_string(),
            length,
            Meridian::Table(spline),
        ))
    }

    fn locate_equator(name: String, length: f64, meridian: Meridian) -> Self {
        let mut profile = Self {
            name,
            length,
            r0: 0.5 * length,
            a_r0: 0.0,
            meridian,
        };
        let grid = VALIDATION_GRID;
        let h = length / grid as f64;
        // Start of the first + → − sign change of a'; fall back to the
        // sampled argmax when there is none.
        let mut bracket = None;
        let mut prev = profile.da(h);
        for k in 2..grid {
            let cur = profile.da(k as f64 * h);
            if prev > 0.0 && cur <= 0.0 {
                bracket = Some(((k - 1) as f64 * h, k as f64 * h));
                break;
            }
            prev = cur;
        }
        let r0 = match bracket {
            Some((lo, hi)) => {
                bisect(|r| profile.da(r), lo, hi, 1e-13 * length).unwrap_or(0.5 * (lo + hi))
            }
            None => (1..grid)
                .map(|k| k as f64 * h)
                .max_by(|x, y| profile.a(*x).total_cmp(&profile.a(*y)))
                .unwrap_or(0.5 * length),
        };
        profile.r0 = r0;
        profile.a_r0 = profile.a(r0);
        profile
    }

    fn accept(self) -> Result<Self> {
        let report = self.validate();
        match report.checks.iter().find(|c| !c.passed) {
            None => Ok(self),
            Some(c) => Err(Error::RejectedProfile {
                invariant: c.name.clone(),
                detail: format!("residual {:e}, tolerance {:e}", c.residual, c.tolerance),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Pole-to-pole meridian distance `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Equator location.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Equator radius `a(r₀)`.
    pub fn a_r0(&self) -> f64 {
        self.a_r0
    }

    /// Length of the equator, `2π a(r₀)`.
    pub fn equator_length(&self) -> f64 {
        2.0 * PI * self.a_r0
    }

    /// Ellipsoid aspect ratio, if this profile is an ellipsoid.
    pub fn aspect(&self) -> Option<f64> {
        match &self.meridian {
            Meridian::Ellipsoid(e) => Some(e.aspect),
            Meridian::RoundSphere => Some(1.0),
            _ => None,
        }
    }

    /// True for the unit round sphere, however it was constructed.
    pub fn is_round_sphere(&self) -> bool {
        self.aspect() == Some(1.0)
    }

    /// `(a(r), a'(r), a''(r))`.
    pub fn eval_all(&self, r: f64) -> (f64, f64, f64) {
        match &self.meridian {
            Meridian::RoundSphere => {
                let (s, c) = r.sin_cos();
                (s, c, -s)
            }
            Meridian::Ellipsoid(e) => e.eval_all(r),
            Meridian::Custom { a, a1, a2 } => (a(r), a1(r), a2(r)),
            Meridian::Table(s) => s.eval_all(r),
        }
    }

    pub fn a(&self, r: f64) -> f64 {
        match &self.meridian {
            Meridian::RoundSphere => r.sin(),
            Meridian::Custom { a, .. } => a(r),
            _ => self.eval_all(r).0,
        }
    }

    pub fn da(&self, r: f64) -> f64 {
        match &self.meridian {
            Meridian::RoundSphere => r.cos(),
            Meridian::Custom { a1, .. } => a1(r),
            _ => self.eval_all(r).1,
        }
    }

    pub fn d2a(&self, r: f64) -> f64 {
        match &self.meridian {
            Meridian::RoundSphere => -r.sin(),
            Meridian::Custom { a2, .. } => a2(r),
            _ => self.eval_all(r).2,
        }
    }

    /// Checks every profile invariant and reports measured residuals.
    pub fn validate(&self) -> ValidationReport {
        let l = self.length;
        let grid = VALIDATION_GRID;
        let h = l / grid as f64;
        let interior: Vec<f64> = (1..grid).map(|k| k as f64 * h).collect();

        let mut checks = Vec::new();
        let mut push = |name: &str, residual: f64, tolerance: f64, passed: bool| {
            checks.push(InvariantCheck {
                name: name.to_string(),
                residual,
                tolerance,
                passed,
            });
        };

        let closure = self.a(0.0).abs().max(self.a(l).abs());
        push("pole_closure", closure, 1e-12 * l, closure <= 1e-12 * l);

        let north = (self.da(0.0) - 1.0).abs();
        push("north_pole_slope", north, 1e-10, north <= 1e-10);

        let south = (self.da(l) + 1.0).abs();
        push("south_pole_slope", south, 1e-10, south <= 1e-10);

        let min_a = interior
            .iter()
            .map(|&r| self.a(r))
            .fold(f64::INFINITY, f64::min);
        push("positive_interior", min_a, 0.0, min_a > 0.0);

        let crit = self.da(self.r0).abs();
        push("equator_critical", crit, 1e-10, crit <= 1e-10);

        let curv = self.d2a(self.r0);
        push("equator_nondegenerate", curv, 0.0, curv < 0.0);

        let mut changes = 0usize;
        let mut last_sign = 0.0;
        for &r in &interior {
            let d = self.da(r);
            if d == 0.0 {
                continue;
            }
            if last_sign != 0.0 && d.signum() != last_sign {
                changes += 1;
            }
            last_sign = d.signum();
        }
        push("single_critical_point", changes as f64, 1.0, changes == 1);

        let excess = interior
            .iter()
            .map(|&r| self.a(r) - self.a_r0)
            .fold(f64::NEG_INFINITY, f64::max);
        push(
            "equator_is_maximum",
            excess.max(0.0),
            1e-14 * self.a_r0.abs().max(1.0),
            excess <= 1e-14 * self.a_r0.abs().max(1.0),
        );

        let passed = checks.iter().all(|c| c.passed);
        ValidationReport {
            profile: self.name.clone(),
            length: l,
            r0: self.r0,
            a_r0: self.a_r0,
            checks,
            passed,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InvariantCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ValidationReport {
    pub profile: String,
    pub length: f64,
    pub r0: f64,
    pub a_r0: f64,
    pub checks: Vec<InvariantCheck>,
    pub passed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GaussLegendre;

    fn arc(f: fn(f64) -> f64) -> ScalarFn {
        Arc::new(f)
    }

    #[test]
    fn round_sphere_geometry() {
        let p = SurfaceProfile::round_sphere();
        assert_eq!(p.a(0.5 * PI), 1.0);
        assert_eq!(p.da(0.0), 1.0);
        assert_eq!(p.d2a(0.5 * PI), -1.0);
        assert!((p.equator_length() - 2.0 * PI).abs() < 1e-15);
        assert!(p.validate().passed);
    }

    #[test]
    fn ellipsoid_with_unit_aspect_is_the_sphere() {
        let e = SurfaceProfile::ellipsoid(1.0).unwrap();
        assert!((e.length() - PI).abs() < 1e-12);
        for k in 0..=1000 {
            let r = PI * k as f64 / 1000.0;
            let (a, a1, a2) = e.eval_all(r);
            assert!((a - r.sin()).abs() < 1e-10);
            assert!((a1 - r.cos()).abs() < 1e-10);
            assert!((a2 + r.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn ellipsoid_length_matches_independent_quadrature() {
        let q: f64 = 1.3;
        let e = SurfaceProfile::ellipsoid(q).unwrap();
        // Composite Gauss–Legendre on the ellipse arclength.
        let gl = GaussLegendre::new(20);
        let half = gl.integrate_composite(0.0, PI, 16, |t| {
            (t.cos().powi(2) + q * q * t.sin().powi(2)).sqrt()
        });
        assert!(
            (e.length() - half).abs() < 1e-12,
            "{} vs {half}",
            e.length()
        );
        assert!((e.a_r0() - 1.0).abs() < 1e-12);
        assert!((e.r0() - 0.5 * e.length()).abs() < 1e-12);
        assert!(e.validate().passed);
    }

    #[test]
    fn oblate_ellipsoid_validates() {
        let e = SurfaceProfile::ellipsoid(0.7).unwrap();
        let report = e.validate();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn ellipsoid_derivatives_are_consistent() {
        let e = SurfaceProfile::ellipsoid(1.3).unwrap();
        let h = 1e-5;
        for &r in &[0.3, 1.1, 1.9, 3.0] {
            let fd1 = (e.a(r + h) - e.a(r - h)) / (2.0 * h);
            let fd2 = (e.da(r + h) - e.da(r - h)) / (2.0 * h);
            assert!((fd1 - e.da(r)).abs() < 1e-9);
            assert!((fd2 - e.d2a(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn ellipsoid_rejects_nonpositive_aspect() {
        assert!(matches!(
            SurfaceProfile::ellipsoid(0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(SurfaceProfile::ellipsoid(-1.0).is_err());
    }

    #[test]
    fn custom_sine_matches_round_sphere() {
        let p = SurfaceProfile::custom("sine", arc(f64::sin), arc(f64::cos), arc(|r| -r.sin()), PI)
            .unwrap();
        let s = SurfaceProfile::round_sphere();
        assert!((p.r0() - s.r0()).abs() < 1e-12);
        assert!((p.a_r0() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn custom_with_two_maxima_is_rejected() {
        // Two bumps: a' changes sign three times.
        let err = SurfaceProfile::custom(
            "double",
            arc(|r| r.sin() * (1.0 + 0.6 * (2.0 * r).sin().powi(2))),
            arc(|r| {
                let s2 = (2.0 * r).sin();
                r.cos() * (1.0 + 0.6 * s2 * s2) + r.sin() * 0.6 * 2.0 * s2 * 2.0 * (2.0 * r).cos()
            }),
            arc(|r| -r.sin()),
            PI,
        )
        .unwrap_err();
        match err {
            Error::RejectedProfile { invariant, .. } => {
                assert_eq!(invariant, "single_critical_point")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn perturbed_profile_is_accepted_off_center() {
        let p = SurfaceProfile::custom(
            "perturbed",
            arc(|r| r.sin() + 0.05 * (2.0 * r).sin() * r.sin()),
            arc(|r| r.cos() + 0.05 * (2.0 * (2.0 * r).cos() * r.sin() + (2.0 * r).sin() * r.cos())),
            arc(|r| {
                -r.sin()
                    + 0.05
                        * (-4.0 * (2.0 * r).sin() * r.sin() + 4.0 * (2.0 * r).cos() * r.cos()
                            - (2.0 * r).sin() * r.sin())
            }),
            PI,
        )
        .unwrap();
        assert!((p.r0() - 0.5 * PI).abs() > 1e-3);
        assert!(p.da(p.r0()).abs() < 1e-10);
    }

    #[test]
    fn sin_2r_fails_validation() {
        let p = SurfaceProfile::custom_unchecked(
            "sin2r",
            arc(|r| (2.0 * r).sin()),
            arc(|r| 2.0 * (2.0 * r).cos()),
            arc(|r| -4.0 * (2.0 * r).sin()),
            PI,
        )
        .unwrap();
        let report = p.validate();
        assert!(!report.passed);
        let convex = report
            .checks
            .iter()
            .find(|c| c.name == "single_critical_point")
            .unwrap();
        assert!(!convex.passed);
    }

    #[test]
    fn table_profile_from_sphere_samples() {
        let n = 400;
        let r: Vec<f64> = (0..=n).map(|k| PI * k as f64 / n as f64).collect();
        let mut a: Vec<f64> = r.iter().map(|x| x.sin()).collect();
        a[n] = 0.0;
        let p = SurfaceProfile::from_table("table", r, a).unwrap();
        assert!((p.r0() - 0.5 * PI).abs() < 1e-6);
        assert!((p.a(1.0) - 1f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn table_rejects_decreasing_rows() {
        let err =
            SurfaceProfile::from_table("bad", vec![0.0, 1.0, 0.8, 2.0], vec![0.0, 0.8, 0.7, 0.0])
                .unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
    }

    #[test]
    fn equator_dominates_dense_grid() {
        for p in [
            SurfaceProfile::round_sphere(),
            SurfaceProfile::ellipsoid(1.3).unwrap(),
        ] {
            let n = 20_000;
            for k in 0..=n {
                let r = p.length() * k as f64 / n as f64;
                assert!(p.a(r) <= p.a_r0() + 1e-15);
            }
        }
    }
}
