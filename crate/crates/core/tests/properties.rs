use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;

use revtone::legendre::sphere_restricted_norm;
use revtone::measures::{
    legendre_mu, legendre_nu, wasserstein1_empirical, EmpiricalMeasure, LimitMeasure,
};
use revtone::spectral::{matrix_element_angular, matrix_element_radial};
use revtone::{ActionEvaluator, RadialSolver, SpectralConfig, SurfaceProfile, SymbolFn};

fn ellipsoid_ev() -> &'static ActionEvaluator {
    static EV: OnceLock<ActionEvaluator> = OnceLock::new();
    EV.get_or_init(|| ActionEvaluator::with_defaults(&SurfaceProfile::ellipsoid(1.3).unwrap()))
}

fn oblate_ev() -> &'static ActionEvaluator {
    static EV: OnceLock<ActionEvaluator> = OnceLock::new();
    EV.get_or_init(|| ActionEvaluator::with_defaults(&SurfaceProfile::ellipsoid(0.7).unwrap()))
}

fn sphere_solver() -> &'static RadialSolver {
    static S: OnceLock<RadialSolver> = OnceLock::new();
    S.get_or_init(|| {
        RadialSolver::new(&SurfaceProfile::round_sphere(), SpectralConfig::default()).unwrap()
    })
}

fn ellipsoid_solver() -> &'static RadialSolver {
    static S: OnceLock<RadialSolver> = OnceLock::new();
    S.get_or_init(|| {
        RadialSolver::new(
            &SurfaceProfile::ellipsoid(1.3).unwrap(),
            SpectralConfig::default(),
        )
        .unwrap()
    })
}

fn evaluator(which: bool) -> &'static ActionEvaluator {
    if which {
        ellipsoid_ev()
    } else {
        oblate_ev()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ellipsoids_are_accepted_and_peak_at_the_equator(q in 0.4f64..2.5) {
        let p = SurfaceProfile::ellipsoid(q).unwrap();
        prop_assert!(p.validate().passed);
        prop_assert!((p.a_r0() - 1.0).abs() < 1e-10);
        prop_assert_eq!(p.equator_length(), 2.0 * PI * p.a_r0());
        let n = 10_000;
        for k in 1..n {
            let r = p.length() * k as f64 / n as f64;
            prop_assert!(p.a(r) <= p.a_r0() + 1e-14);
        }
    }

    #[test]
    fn action_increases_with_energy(which: bool, x in -0.999f64..0.999, e in 0.05f64..20.0) {
        let ev = evaluator(which);
        let c = x * e * ev.profile().a_r0();
        prop_assert!(ev.di2_de(c, e).unwrap() > 0.0);
    }

    #[test]
    fn energy_inverts_the_action(which: bool, x in -0.999f64..0.999, i2 in 0.1f64..10.0) {
        let ev = evaluator(which);
        let c = x * i2;
        let k = ev.energy_k(c, i2).unwrap();
        prop_assert!((ev.action_i2(c, k).unwrap() - i2).abs() <= 1e-10 * i2.max(1.0));
    }

    #[test]
    fn action_and_energy_are_homogeneous(which: bool, x in -0.99f64..0.99, t_idx in 0usize..3) {
        let t = [0.5, 2.0, 10.0][t_idx];
        let ev = evaluator(which);
        let e = 1.3;
        let c = x * e * ev.profile().a_r0();
        let lhs = ev.action_i2(t * c, t * e).unwrap();
        let rhs = t * ev.action_i2(c, e).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
        let k1 = ev.energy_k(x, 1.0).unwrap();
        let kt = ev.energy_k(t * x, t).unwrap();
        prop_assert!((kt - t * k1).abs() <= 1e-9 * kt.max(1.0));
    }

    #[test]
    fn torus_average_of_one_is_one(which: bool, c in -0.9999f64..0.9999) {
        let ev = evaluator(which);
        let v = ev.torus_average(&SymbolFn::one(), c).unwrap();
        prop_assert!((v - 1.0).abs() <= 1e-9, "c = {}, average = {}", c, v);
    }

    #[test]
    fn sphere_density_collapses_to_arcsine(c in -0.999f64..0.999) {
        let ev = ActionEvaluator::with_defaults(&SurfaceProfile::round_sphere());
        let d = ev.limit_density_unnorm(c).unwrap();
        prop_assert!((d * (1.0 - c * c).sqrt() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn limit_cdf_is_monotone(which: bool, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let ev = evaluator(which);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(ev.limit_cdf(lo).unwrap() <= ev.limit_cdf(hi).unwrap());
    }

    #[test]
    fn phase_space_ratio_symbols_are_homogeneous(
        r in 0.1f64..3.0, th in 0.0f64..6.3, rho in -2.0f64..2.0, eta in 0.1f64..2.0
    ) {
        let s = SymbolFn::phase_space(|r, th, rho, eta| th.sin() * r * eta / (rho * rho + eta * eta).sqrt());
        prop_assert!(s.check_homogeneity(&[(r, th, rho, eta)]).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn radial_modes_satisfy_sturm_liouville_structure(m in -12i64..=12, which: bool) {
        let solver = if which { ellipsoid_solver() } else { sphere_solver() };
        let modes = solver.radial_modes(m, 6).unwrap();
        let mirror = solver.radial_modes(-m, 6).unwrap();
        for (k, (mode, twin)) in modes.iter().zip(&mirror).enumerate() {
            prop_assert_eq!(mode.n, k);
            prop_assert_eq!(mode.sign_changes(), k);
            prop_assert_eq!(mode.ell, m.unsigned_abs() as usize + k);
            prop_assert!((mode.normalization() - 1.0).abs() < 1e-8);
            prop_assert!(mode.lambda > 0.0 || (m == 0 && k == 0));
            prop_assert!((mode.lambda_sq() - twin.lambda_sq()).abs() <= 1e-12 * mode.lambda_sq().max(1.0));
            prop_assert!((mode.u_at_r0.abs() - twin.u_at_r0.abs()).abs() <= 1e-12);
        }
        prop_assert!(modes.windows(2).all(|w| w[1].lambda > w[0].lambda));
    }

    #[test]
    fn constant_symbol_has_unit_matrix_elements(m in -8i64..=8, n in 0usize..6) {
        let mode = ellipsoid_solver().mode(m, n).unwrap();
        prop_assert!((matrix_element_radial(&mode, |_| 1.0) - 1.0).abs() < 1e-8);
        if mode.lambda > 0.0 {
            prop_assert_eq!(matrix_element_angular(&mode, |_| 1.0).unwrap(), 1.0);
        }
    }
}

#[test]
fn unit_aspect_ellipsoid_is_the_sphere() {
    let e = SurfaceProfile::ellipsoid(1.0).unwrap();
    let s = SurfaceProfile::round_sphere();
    assert!((e.length() - PI).abs() < 1e-12);
    for k in 0..=1000 {
        let r = PI * k as f64 / 1000.0;
        let (a, b) = (e.eval_all(r), s.eval_all(r));
        assert!(
            (a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10 && (a.2 - b.2).abs() < 1e-10,
            "r = {r}"
        );
    }
}

#[test]
fn endpoint_density_limit_stabilises() {
    for ev in [ellipsoid_ev(), oblate_ev()] {
        let vals: Vec<f64> = (2..=6)
            .map(|k| {
                let c = 1.0 - 10f64.powi(-k);
                ev.limit_density_unnorm(c).unwrap() * (1.0 - c * c).sqrt()
            })
            .collect();
        assert!(vals.iter().all(|v| *v > 0.0 && v.is_finite()));
        for w in vals.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.01, "{vals:?}");
        }
    }
}

#[test]
fn derivative_identity_on_the_equator_fibre() {
    for ev in [ellipsoid_ev(), oblate_ev()] {
        for k in 0..20 {
            let c = -0.95 + 0.1 * k as f64;
            let (fd, closed) = ev.fibre_derivative_check(c).unwrap();
            assert!(
                ((fd - closed) / closed).abs() < 1e-6,
                "c = {c}: {fd} vs {closed}"
            );
        }
    }
}

#[test]
fn sphere_grid_convergence_is_second_order() {
    let p = SurfaceProfile::round_sphere();
    let raw = |g| {
        RadialSolver::new(
            &p,
            SpectralConfig {
                grid_size: g,
                richardson: false,
            },
        )
        .unwrap()
    };
    let (s1, s2) = (raw(1000), raw(2000));
    for &(m, n) in &[(0i64, 1usize), (2, 1), (5, 4), (0, 10)] {
        let ell = m as f64 + n as f64;
        let exact = ell * (ell + 1.0);
        let e1 = (s1.mode(m, n).unwrap().lambda_sq() - exact).abs();
        let e2 = (s2.mode(m, n).unwrap().lambda_sq() - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order >= 1.8, "(m, n) = ({m}, {n}): observed order {order}");
    }
}

#[test]
fn sphere_parity_zeroes_odd_restricted_norms() {
    let s = sphere_solver();
    for ell in 1..=12 {
        let slice = s.joint_slice(ell).unwrap();
        assert_eq!(slice.modes.len(), 2 * ell + 1);
        for (mode, &w) in slice.modes.iter().zip(&slice.restricted_norms) {
            if mode.n % 2 == 1 {
                assert!(w < 1e-12, "ell {ell}, m {}", mode.m);
            }
        }
        for m in 1..=ell as i64 {
            let (a, b) = (slice.mode(m).unwrap(), slice.mode(-m).unwrap());
            assert_eq!(a.lambda, b.lambda);
        }
    }
}

#[test]
fn slice_norms_are_symmetric_on_the_ellipsoid() {
    let slice = ellipsoid_solver().joint_slice(15).unwrap();
    let w = &slice.restricted_norms;
    for k in 0..w.len() {
        assert!((w[k] - w[w.len() - 1 - k]).abs() < 1e-8);
    }
}

#[test]
fn gaussian_beam_avoids_the_polar_cap() {
    // b is a smooth bump supported in (0, π/4).
    let bump = |r: f64| {
        let x = r / (PI / 4.0);
        if x > 0.0 && x < 1.0 {
            (-1.0 / (x * (1.0 - x))).exp() * 54.6
        } else {
            0.0
        }
    };
    let mode = sphere_solver().mode(20, 0).unwrap();
    assert!(matrix_element_radial(&mode, bump) < 1e-3);
    let oracle = legendre_nu(20, &SymbolFn::radial(bump)).unwrap();
    assert!(oracle.total_mass_raw() > 0.0);
    let mode10 = sphere_solver().mode(1, 0).unwrap();
    assert!(matrix_element_radial(&mode10, f64::cos).abs() < 1e-10);
    let beam = sphere_solver().mode(10, 0).unwrap();
    assert!((matrix_element_angular(&beam, |s| s).unwrap() - 10.0 / 110f64.sqrt()).abs() < 1e-8);
}

#[test]
fn empirical_measures_are_normalised_and_symmetric() {
    for ell in [1usize, 2, 7, 30, 101] {
        let mu = legendre_mu(ell).unwrap();
        let mass: f64 = mu.atoms().iter().map(|a| a.1).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((mu.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(wasserstein1_empirical(&mu, &mu.reflected()), 0.0);
        assert!(mu.atoms().windows(2).all(|w| w[0].0 < w[1].0));
    }
    let slice = ellipsoid_solver().joint_slice(9).unwrap();
    let mu = revtone::measures::empirical_mu(&slice).unwrap();
    assert!(wasserstein1_empirical(&mu, &mu.reflected()) < 1e-9);
}

#[test]
fn sphere_ell_two_centre_weight() {
    let mu = legendre_mu(2).unwrap();
    let centre = mu.atoms().iter().find(|a| a.0 == 0.0).unwrap().1;
    assert!((centre - 0.625 / mu.total_mass_raw()).abs() < 1e-15);
    assert!((sphere_restricted_norm(2, 0) - 0.625).abs() < 1e-15);
}

#[test]
fn polynomial_moments_converge_along_doubling() {
    let lim = LimitMeasure::arcsine();
    let tests: [fn(f64) -> f64; 4] = [
        |c| c * c,
        |c| c.powi(4),
        |c| 1.0 + c - c * c,
        |c| c.powi(4) - 0.3 * c * c,
    ];
    for f in tests {
        let exact = lim.integrate(f);
        let gaps: Vec<f64> = [8usize, 16, 32, 64, 128, 256]
            .iter()
            .map(|&l| (legendre_mu(l).unwrap().integrate(f) - exact).abs())
            .collect();
        for w in gaps.windows(2) {
            assert!(w[1] <= 1.05 * w[0], "{gaps:?}");
        }
    }
}

#[test]
fn angular_nu_matches_trace_identity() {
    let chi = |s: f64| s * s + 0.25;
    let f = |c: f64| (2.0 * c).cos();
    let slice = ellipsoid_solver().joint_slice(20).unwrap();
    let nu = revtone::measures::empirical_nu(&slice, &SymbolFn::angular(chi)).unwrap();
    let atom_sum = nu.integrate(f);
    // Tr f(D_θ/ℓ) χ(D_θ/λ) / Tr χ(D_θ/λ) over the slice.
    let (mut num, mut den) = (0.0, 0.0);
    for mode in &slice.modes {
        let w = chi(mode.m as f64 / mode.lambda);
        num += f(mode.m as f64 / 20.0) * w;
        den += w;
    }
    assert!((atom_sum - num / den).abs() < 1e-12);
}

#[test]
fn weyl_mass_grows_linearly() {
    let s = ellipsoid_solver();
    let m_ell = |l| {
        revtone::measures::empirical_mu(&s.joint_slice(l).unwrap())
            .unwrap()
            .total_mass_raw()
    };
    let (m50, m100) = (m_ell(50), m_ell(100));
    assert!((m100 / m50 / 2.0 - 1.0).abs() < 0.1);
    // Under unit-normalised radial profiles, M_ℓ/ℓ approaches M/π.
    let m = ellipsoid_ev().normalization_m().unwrap();
    assert!((m100 / 100.0 / (m / PI) - 1.0).abs() < 0.01);
    for l in [50usize, 100] {
        let mu = legendre_mu(l).unwrap();
        assert!((mu.total_mass_raw() - (l as f64 + 0.5)).abs() < 1e-9);
    }
}

#[test]
fn signed_radial_symbol_normalises_when_mass_is_nonzero() {
    let b = SymbolFn::radial(f64::cos);
    let slice = ellipsoid_solver().joint_slice(12).unwrap();
    let nu = revtone::measures::empirical_nu(&slice, &b).unwrap();
    assert!(nu.total_mass_raw() < 0.0);
    assert!(nu.is_normalized());
    assert!((nu.atoms().iter().map(|a| a.1).sum::<f64>() - 1.0).abs() < 1e-12);
    let odd = EmpiricalMeasure::from_raw(1, [(-1, -0.5), (1, 0.5)]).unwrap();
    assert!(odd.is_signed() && !odd.is_normalized());
}

#[test]
fn evaluations_are_bit_identical() {
    let p = SurfaceProfile::ellipsoid(1.3).unwrap();
    let a = ActionEvaluator::with_defaults(&p);
    let b = ActionEvaluator::with_defaults(&p);
    for c in [0.0, 0.3, -0.77] {
        assert_eq!(a.frequencies(c).unwrap(), b.frequencies(c).unwrap());
        assert_eq!(
            a.limit_cdf(c).unwrap().to_bits(),
            b.limit_cdf(c).unwrap().to_bits()
        );
    }
    let s1 = RadialSolver::new(&p, SpectralConfig::default())
        .unwrap()
        .joint_slice(7)
        .unwrap();
    let s2 = RadialSolver::new(&p, SpectralConfig::default())
        .unwrap()
        .joint_slice(7)
        .unwrap();
    assert_eq!(s1.restricted_norms, s2.restricted_norms);
    assert!(s1.modes.iter().zip(&s2.modes).all(|(x, y)| x.u() == y.u()));
}
