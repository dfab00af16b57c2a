//! Time averages along actual geodesics, compared with torus averages.
//!
//! A unit-speed geodesic with Clairaut constant `c` obeys
//! `r'' = c² a'(r) / a(r)³`. Averaging `b(r(t))` over whole radial periods
//! gives the torus average of the radial symbol `b`. Tori are labelled at
//! `I₂ = 1`, so the matching unit-speed geodesic has Clairaut constant
//! `c / K(c, 1)`.

use revtone::{ActionEvaluator, SurfaceProfile, SymbolFn};

/// Integrates `(r, ρ, ∫b)` with classical RK4 and returns the time average of
/// `b` between the first and the `(periods + 1)`-th minimum of `r`.
fn geodesic_average(p: &SurfaceProfile, c: f64, b: impl Fn(f64) -> f64, periods: usize) -> f64 {
    let dt = 2e-4;
    let rhs = |s: [f64; 3]| {
        let (a, da, _) = p.eval_all(s[0]);
        [s[1], c * c * da / (a * a * a), b(s[0])]
    };
    let a0 = p.a_r0();
    let mut s = [p.r0(), (1.0 - c * c / (a0 * a0)).sqrt(), 0.0];
    let mut t = 0.0;
    let mut marks: Vec<(f64, f64)> = Vec::new();
    while marks.len() <= periods {
        let k1 = rhs(s);
        let k2 = rhs(std::array::from_fn(|i| s[i] + 0.5 * dt * k1[i]));
        let k3 = rhs(std::array::from_fn(|i| s[i] + 0.5 * dt * k2[i]));
        let k4 = rhs(std::array::from_fn(|i| s[i] + dt * k3[i]));
        let next: [f64; 3] =
            std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        if s[1] < 0.0 && next[1] >= 0.0 {
            // Radial velocity changes sign at a minimum of r; locate it linearly.
            let f = -s[1] / (next[1] - s[1]);
            marks.push((t + f * dt, s[2] + f * (next[2] - s[2])));
        }
        s = next;
        t += dt;
    }
    let (t0, i0) = marks[0];
    let (t1, i1) = marks[periods];
    (i1 - i0) / (t1 - t0)
}

#[test]
fn sphere_averages() {
    let p = SurfaceProfile::round_sphere();
    let ev = ActionEvaluator::with_defaults(&p);
    let c = 0.5;
    let got = geodesic_average(&p, c, f64::cos, 5);
    assert!(got.abs() < 1e-6, "{got}");
    assert!(
        ev.torus_average(&SymbolFn::radial(f64::cos), c)
            .unwrap()
            .abs()
            < 1e-10
    );

    let got = geodesic_average(&p, c, |r| r.cos().powi(2), 5);
    assert!((got - 0.375).abs() < 1e-6, "{got}");
    let torus = ev
        .torus_average(&SymbolFn::radial(|r| r.cos().powi(2)), c)
        .unwrap();
    assert!((torus - 0.375).abs() < 1e-10, "{torus}");
}

#[test]
fn ellipsoid_matches_geodesic_time_average() {
    let p = SurfaceProfile::ellipsoid(1.3).unwrap();
    let ev = ActionEvaluator::with_defaults(&p);
    let b = |r: f64| (0.4 * r).exp() * r.cos() + 0.3 * r * r;
    for c in [0.05, 0.35, -0.6, 0.9] {
        let energy = ev.frequencies(c).unwrap().energy;
        let flow = geodesic_average(&p, c / energy, b, 6);
        let torus = ev.torus_average(&SymbolFn::radial(b), c).unwrap();
        assert!(
            (flow - torus).abs() < 1e-3,
            "c = {c}: flow {flow}, torus {torus}"
        );
    }
}
