//! Empirical measures on `[-1, 1]` built from one `ℓ`-slice of joint
//! eigenfunctions, and their distance to the limit measures.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::Serialize;

use crate::actions::{ActionEvaluator, DensityTable};
use crate::error::{Error, Result};
use crate::legendre::{normalized_assoc, sphere_restricted_norm};
use crate::numerics::{bisect, GaussLegendre};
use crate::spectral::{
    matrix_element_angular, matrix_element_radial, JointSlice, RadialSolver, SpectralConfig,
};
use crate::symbol::SymbolFn;

/// Finitely many atoms `(c_j, w_j)` with `c_j = m/ℓ`, sorted by `c_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    pub ell: usize,
    atoms: Vec<(f64, f64)>,
    total_mass_raw: f64,
    signed: bool,
    normalized: bool,
}

impl EmpiricalMeasure {
    /// Builds the measure from unnormalised weights indexed by `m`.
    ///
    /// The weights are divided by their sum whenever the sum is nonzero, so
    /// a measure whose weights all share one sign becomes a probability
    /// measure. If the sum vanishes the weights are kept as they are and
    /// the measure is flagged as signed.
    pub fn from_raw(ell: usize, raw: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let mut raw: Vec<(i64, f64)> = raw.into_iter().collect();
        if ell == 0 || raw.is_empty() {
            return Err(Error::DegenerateMeasure);
        }
        raw.sort_by_key(|&(m, _)| m);
        let total: f64 = raw.iter().map(|&(_, w)| w).sum();
        let scale: f64 = raw.iter().map(|&(_, w)| w.abs()).sum();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::DegenerateMeasure);
        }
        let normalized = total.abs() > 1e-14 * scale;
        let divisor = if normalized { total } else { 1.0 };
        let atoms: Vec<(f64, f64)> = raw
            .iter()
            .map(|&(m, w)| (m as f64 / ell as f64, w / divisor))
            .collect();
        let signed = !normalized || atoms.iter().any(|&(_, w)| w < 0.0);
        Ok(Self {
            ell,
            atoms,
            total_mass_raw: total,
            signed,
            normalized,
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `M_ℓ` or `N_ℓ(B)`: the weight sum before normalisation.
    pub fn total_mass_raw(&self) -> f64 {
        self.total_mass_raw
    }

    /// True when some weight is negative or the raw mass vanished.
    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(c, w)| w * f(c)).sum()
    }

    /// `μ((-∞, c])`.
    pub fn cdf(&self, c: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|&&(x, _)| x <= c)
            .map(|&(_, w)| w)
            .sum()
    }

    /// Image under `c ↦ -c`.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        out.atoms = self.atoms.iter().rev().map(|&(c, w)| (-c, w)).collect();
        out
    }
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolutely continuous limit measure on `[-1, 1]`.
#[derive(Clone)]
pub struct LimitMeasure {
    pub density: RealFn,
    pub cdf: RealFn,
    /// `M` for `μ`, `ω(B)` for `ν`.
    pub mass_constant: f64,
}

impl std::fmt::Debug for LimitMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LimitMeasure")
            .field("mass_constant", &self.mass_constant)
            .finish_non_exhaustive()
    }
}

impl LimitMeasure {
    pub fn from_fns(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        mass_constant: f64,
    ) -> Self {
        Self {
            density: Arc::new(density),
            cdf: Arc::new(cdf),
            mass_constant,
        }
    }

    /// The arcsine law `1/(π√(1 − c²))`.
    pub fn arcsine() -> Self {
        Self::from_fns(
            |c| {
                if c.abs() < 1.0 {
                    1.0 / (PI * (1.0 - c * c).sqrt())
                } else {
                    0.0
                }
            },
            |c| 0.5 + c.clamp(-1.0, 1.0).asin() / PI,
            PI,
        )
    }

    fn from_table(table: DensityTable) -> Result<Self> {
        let mass = table.total();
        if !(mass.abs() > 0.0) {
            return Err(Error::SignedMeasure(mass));
        }
        let table = Arc::new(table);
        let t2 = table.clone();
        Ok(Self::from_fns(
            move |c| {
                if c.abs() < 1.0 {
                    table.value(c) / mass
                } else {
                    0.0
                }
            },
            move |c| t2.cumulative(c) / mass,
            mass,
        ))
    }

    /// `∫ f(c) density(c) dc`, through `c = sin t`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let rule = GaussLegendre::new(20);
        rule.integrate_composite(-FRAC_PI_2, FRAC_PI_2, 64, |t| {
            let (s, c) = t.sin_cos();
            f(s) * (self.density)(s) * c
        })
    }
}

/// Limit of `μ_ℓ` as `ℓ → ∞`: the normalised `ω₂/√(1 − c²/(K² a(r₀)²))`.
pub fn limit_measure_mu(ev: &ActionEvaluator) -> Result<LimitMeasure> {
    let table = ev.limit_table()?.clone();
    let mass = table.total();
    let ev = Arc::new(ev.clone());
    let t = Arc::new(table);
    Ok(LimitMeasure::from_fns(
        move |c| {
            if c.abs() < 1.0 {
                ev.limit_density_unnorm(c).map_or(f64::NAN, |v| v / mass)
            } else if c.abs() == 1.0 {
                f64::INFINITY
            } else {
                0.0
            }
        },
        move |c| (t.cumulative(c) / mass).clamp(0.0, 1.0),
        mass,
    ))
}

/// Limit of `ν_ℓ(B)`: `σ̂(c)/ω(B)`.
pub fn limit_measure_nu(ev: &ActionEvaluator, sym: &SymbolFn) -> Result<LimitMeasure> {
    LimitMeasure::from_table(ev.torus_average_table(sym)?)
}

/// `μ_ℓ` from the restricted norms of a slice.
pub fn empirical_mu(slice: &JointSlice) -> Result<EmpiricalMeasure> {
    EmpiricalMeasure::from_raw(
        slice.ell,
        slice
            .modes
            .iter()
            .zip(&slice.restricted_norms)
            .map(|(mode, &w)| (mode.m, w)),
    )
}

/// `ν_ℓ(B)` from the diagonal matrix elements of `B` on a slice.
pub fn empirical_nu(slice: &JointSlice, sym: &SymbolFn) -> Result<EmpiricalMeasure> {
    let weights = slice
        .modes
        .iter()
        .map(|mode| {
            let w = match sym {
                SymbolFn::RadialMult(b) => matrix_element_radial(mode, |r| b(r)),
                SymbolFn::AngularRatio(chi) => matrix_element_angular(mode, |s| chi(s))?,
                SymbolFn::PhaseSpace(_) => return Err(Error::UnsupportedQuantization),
            };
            Ok((mode.m, w))
        })
        .collect::<Result<Vec<_>>>()?;
    EmpiricalMeasure::from_raw(slice.ell, weights)
}

/// `μ_ℓ` on the round sphere from closed-form Legendre values.
pub fn legendre_mu(ell: usize) -> Result<EmpiricalMeasure> {
    let l = ell as i64;
    EmpiricalMeasure::from_raw(ell, (-l..=l).map(|m| (m, sphere_restricted_norm(ell, m))))
}

/// `ν_ℓ(B)` on the round sphere from closed-form spherical harmonics.
pub fn legendre_nu(ell: usize, sym: &SymbolFn) -> Result<EmpiricalMeasure> {
    let l = ell as i64;
    let lambda = ((ell * (ell + 1)) as f64).sqrt();
    let weights = match sym {
        SymbolFn::AngularRatio(chi) => (-l..=l).map(|m| (m, chi(m as f64 / lambda))).collect(),
        SymbolFn::RadialMult(b) => {
            let rule = GaussLegendre::new(16);
            let panels = ell + 16;
            (-l..=l)
                .map(|m| {
                    // ⟨bY, Y⟩ = 2π ∫ b(r) P̄(cos r)² sin r dr
                    let v = rule.integrate_composite(0.0, PI, panels, |r| {
                        let p = normalized_assoc(ell, m, r.cos());
                        b(r) * p * p * r.sin()
                    });
                    (m, 2.0 * PI * v)
                })
                .collect::<Vec<_>>()
        }
        SymbolFn::PhaseSpace(_) => return Err(Error::UnsupportedQuantization),
    };
    EmpiricalMeasure::from_raw(ell, weights)
}

/// Kolmogorov distance, taking both one-sided limits at every atom.
pub fn ks_distance(emp: &EmpiricalMeasure, lim: &LimitMeasure) -> f64 {
    let mut below = 0.0;
    let mut worst = 0.0_f64;
    for &(c, w) in emp.atoms() {
        let f = (lim.cdf)(c);
        worst = worst.max((below - f).abs());
        below += w;
        worst = worst.max((below - f).abs());
    }
    worst
}

/// `∫_{-1}^{1} |F_emp − F_lim| dc`.
///
/// Between consecutive atoms the empirical CDF is constant; each such
/// interval is integrated in `t = arcsin c` with Gauss–Legendre panels
/// that are split where the two CDFs cross.
pub fn wasserstein1(emp: &EmpiricalMeasure, lim: &LimitMeasure) -> f64 {
    let rule = GaussLegendre::new(12);
    let mut breaks: Vec<f64> = vec![-1.0];
    breaks.extend(emp.atoms().iter().map(|&(c, _)| c.clamp(-1.0, 1.0)));
    breaks.push(1.0);
    let mut level = 0.0;
    let mut total = 0.0;
    for (k, pair) in breaks.windows(2).enumerate() {
        if k > 0 {
            level += emp.atoms()[k - 1].1;
        }
        let (t0, t1) = (pair[0].asin(), pair[1].asin());
        if t1 <= t0 {
            continue;
        }
        let gap = |t: f64| level - (lim.cdf)(t.sin());
        let panels = ((t1 - t0) / 0.05).ceil().max(1.0) as usize;
        let step = (t1 - t0) / panels as f64;
        for p in 0..panels {
            let lo = t0 + p as f64 * step;
            let hi = if p + 1 == panels { t1 } else { lo + step };
            total += abs_integral(&rule, lo, hi, &gap);
        }
    }
    total
}

/// `∫ |g(t)| cos t dt` on one panel, split at sign changes of `g`.
fn abs_integral(rule: &GaussLegendre, lo: f64, hi: f64, g: &impl Fn(f64) -> f64) -> f64 {
    const SCAN: usize = 8;
    let mut cuts = vec![lo];
    let mut prev_t = lo;
    let mut prev = g(lo);
    for k in 1..=SCAN {
        let t = lo + (hi - lo) * k as f64 / SCAN as f64;
        let v = g(t);
        if prev * v < 0.0 {
            if let Some(root) = bisect(g, prev_t, t, 0.0) {
                cuts.push(root);
            }
        }
        prev_t = t;
        prev = v;
    }
    cuts.push(hi);
    cuts.windows(2)
        .map(|w| rule.integrate(w[0], w[1], |t| g(t) * t.cos()).abs())
        .sum()
}

/// `∫ |F₁ − F₂| dc` between two atomic measures.
pub fn wasserstein1_empirical(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    let mut events: Vec<(f64, f64)> = a
        .atoms()
        .iter()
        .copied()
        .chain(b.atoms().iter().map(|&(c, w)| (c, -w)))
        .collect();
    events.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut diff = 0.0;
    let mut total = 0.0;
    for pair in events.windows(2) {
        diff += pair[0].1;
        total += diff.abs() * (pair[1].0 - pair[0].0);
    }
    total
}

/// Where the sweep takes restricted norms and matrix elements from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSource {
    /// The finite-volume radial solver.
    Solver(SpectralConfig),
    /// Closed-form spherical harmonics (round sphere only).
    Legendre,
}

impl NormSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormSource::Solver(_) => "solver",
            NormSource::Legendre => "legendre",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub ell: usize,
    #[serde(rename = "M_ell")]
    pub m_ell: Option<f64>,
    #[serde(rename = "M_ell_over_ell")]
    pub m_ell_over_ell: Option<f64>,
    pub ks_mu: Option<f64>,
    pub w1_mu: Option<f64>,
    pub ks_nu: Option<f64>,
    pub w1_nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_signed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(ell: usize, err: &Error) -> Self {
        Self {
            ell,
            m_ell: None,
            m_ell_over_ell: None,
            ks_mu: None,
            w1_mu: None,
            ks_nu: None,
            w1_nu: None,
            nu_signed: None,
            error: Some(err.to_string()),
        }
    }
}

/// Least-squares line through `(ln ℓ, ln W₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub w1_exponent: f64,
    pub w1_r2: f64,
    pub points: usize,
}

impl DecayFit {
    pub fn from_points(points: &[(usize, f64)]) -> Option<Self> {
        let xy: Vec<(f64, f64)> = points
            .iter()
            .filter(|&&(_, w)| w > 0.0 && w.is_finite())
            .map(|&(l, w)| ((l as f64).ln(), w.ln()))
            .collect();
        if xy.len() < 2 {
            return None;
        }
        let n = xy.len() as f64;
        let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
        let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let r2 = if syy == 0.0 {
            1.0
        } else {
            sxy * sxy / (sxx * syy)
        };
        Some(Self {
            w1_exponent: slope,
            w1_r2: r2,
            points: xy.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub profile: String,
    pub norm_source: String,
    pub ells: Vec<usize>,
    pub records: Vec<SweepRecord>,
    pub fit: Option<DecayFit>,
    /// Fit restricted to even `ℓ`, where symmetric profiles charge the
    /// same parity class of `m` at every step.
    pub fit_even: Option<DecayFit>,
}

impl ConvergenceReport {
    pub fn record(&self, ell: usize) -> Option<&SweepRecord> {
        self.records.iter().find(|r| r.ell == ell)
    }
}

fn measures_for(
    ev: &ActionEvaluator,
    solver: Option<&RadialSolver>,
    ell: usize,
    sym: Option<&SymbolFn>,
) -> Result<(EmpiricalMeasure, Option<EmpiricalMeasure>)> {
    match solver {
        Some(s) => {
            let slice = s.joint_slice(ell)?;
            let nu = sym.map(|b| empirical_nu(&slice, b)).transpose()?;
            Ok((empirical_mu(&slice)?, nu))
        }
        None => {
            debug_assert!(ev.profile().is_round_sphere());
            let nu = sym.map(|b| legendre_nu(ell, b)).transpose()?;
            Ok((legendre_mu(ell)?, nu))
        }
    }
}

/// Builds `μ_ℓ` (and `ν_ℓ(B)` if a symbol is given) for every `ℓ` and
/// measures the distance to the limit measures. A failing `ℓ` is recorded
/// in its row and the sweep continues.
pub fn convergence_sweep(
    ev: &ActionEvaluator,
    ells: &[usize],
    sym: Option<&SymbolFn>,
    source: NormSource,
) -> Result<ConvergenceReport> {
    if ells.is_empty() {
        return Err(Error::InvalidParameter("ells must not be empty".into()));
    }
    if ells.windows(2).any(|w| w[0] >= w[1]) || ells[0] == 0 {
        return Err(Error::InvalidParameter(
            "ells must be positive and strictly ascending".into(),
        ));
    }
    let profile = ev.profile();
    let solver = match source {
        NormSource::Solver(cfg) => Some(RadialSolver::new(profile, cfg)?),
        NormSource::Legendre => {
            if !profile.is_round_sphere() {
                return Err(Error::InvalidParameter(format!(
                    "legendre norms are only available on the round sphere, not {}",
                    profile.name()
                )));
            }
            None
        }
    };
    let lim_mu = limit_measure_mu(ev)?;
    let lim_nu = sym.map(|b| limit_measure_nu(ev, b)).transpose()?;

    let row = |&ell: &usize| -> SweepRecord {
        match measures_for(ev, solver.as_ref(), ell, sym) {
            Err(e) => SweepRecord::failed(ell, &e),
            Ok((mu, nu)) => {
                let m_ell = mu.total_mass_raw();
                let (ks_nu, w1_nu, nu_signed) = match (&nu, &lim_nu) {
                    (Some(n), Some(l)) => (
                        Some(ks_distance(n, l)),
                        Some(wasserstein1(n, l)),
                        Some(n.is_signed()),
                    ),
                    _ => (None, None, None),
                };
                SweepRecord {
                    ell,
                    m_ell: Some(m_ell),
                    m_ell_over_ell: Some(m_ell / ell as f64),
                    ks_mu: Some(ks_distance(&mu, &lim_mu)),
                    w1_mu: Some(wasserstein1(&mu, &lim_mu)),
                    ks_nu,
                    w1_nu,
                    nu_signed,
                    error: None,
                }
            }
        }
    };
    #[cfg(feature = "parallel")]
    let records: Vec<SweepRecord> = {
        use rayon::prelude::*;
        ells.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let records: Vec<SweepRecord> = ells.iter().map(row).collect();

    let pts = |even_only: bool| -> Vec<(usize, f64)> {
        records
            .iter()
            .filter(|r| !even_only || r.ell % 2 == 0)
            .filter_map(|r| r.w1_mu.map(|w| (r.ell, w)))
            .collect()
    };
    Ok(ConvergenceReport {
        profile: profile.name().to_string(),
        norm_source: source.as_str().to_string(),
        ells: ells.to_vec(),
        fit: DecayFit::from_points(&pts(false)),
        fit_even: DecayFit::from_points(&pts(true)),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SurfaceProfile;

    #[test]
    fn sphere_ell_one_atoms() {
        let mu = legendre_mu(1).unwrap();
        let w: Vec<f64> = mu.atoms().iter().map(|a| a.1).collect();
        assert!((w[0] - 0.5).abs() < 1e-15 && w[1] == 0.0 && (w[2] - 0.5).abs() < 1e-15);
        assert!((mu.total_mass_raw() - 1.5).abs() < 1e-15);
        assert!(!mu.is_signed());
    }

    #[test]
    fn single_atom_against_arcsine() {
        let delta = EmpiricalMeasure::from_raw(1, [(0, 1.0)]).unwrap();
        let lim = LimitMeasure::arcsine();
        assert!((ks_distance(&delta, &lim) - 0.5).abs() < 1e-15);
        // ∫|H(c) − F(c)| dc = 2∫_0^1 (1/2 − arcsin(c)/π) dc = 1 − 2(π/2 − 1)/π
        let want = 2.0 / PI;
        assert!((wasserstein1(&delta, &lim) - want).abs() < 1e-13);
    }

    #[test]
    fn ell_one_w1_closed_form() {
        // F_emp = 1/2 on (-1, 1). ∫|1/2 − F| = 2∫_0^1 arcsin(c)/π dc = 1 − 2/π
        let mu = legendre_mu(1).unwrap();
        let w = wasserstein1(&mu, &LimitMeasure::arcsine());
        assert!((w - (1.0 - 2.0 / PI)).abs() < 1e-13, "{w}");
    }

    #[test]
    fn empirical_distances() {
        let a = EmpiricalMeasure::from_raw(1, [(0, 1.0)]).unwrap();
        let b = EmpiricalMeasure::from_raw(1, [(1, 1.0)]).unwrap();
        assert_eq!(wasserstein1_empirical(&a, &b), 1.0);
        assert_eq!(wasserstein1_empirical(&a, &a), 0.0);
        let mu = legendre_mu(7).unwrap();
        assert!(wasserstein1_empirical(&mu, &mu.reflected()) < 1e-15);
    }

    #[test]
    fn signed_and_degenerate_inputs() {
        assert!(matches!(
            EmpiricalMeasure::from_raw(2, [(0, 0.0), (1, 0.0)]),
            Err(Error::DegenerateMeasure)
        ));
        let flipped = EmpiricalMeasure::from_raw(1, [(-1, -1.0), (1, -3.0)]).unwrap();
        assert!(!flipped.is_signed());
        assert!((flipped.atoms()[1].1 - 0.75).abs() < 1e-15);
        let mixed = EmpiricalMeasure::from_raw(1, [(-1, -1.0), (1, 3.0)]).unwrap();
        assert!(mixed.is_signed() && mixed.is_normalized());
        let null = EmpiricalMeasure::from_raw(1, [(-1, -1.0), (1, 1.0)]).unwrap();
        assert!(null.is_signed() && !null.is_normalized());
        assert_eq!(null.atoms()[1].1, 1.0);
    }

    #[test]
    fn sphere_limit_measures() {
        let ev = ActionEvaluator::with_defaults(&SurfaceProfile::round_sphere());
        let mu = limit_measure_mu(&ev).unwrap();
        assert!((mu.mass_constant - PI).abs() < 1e-10);
        assert!(((mu.density)(0.3) - 1.0 / (PI * 0.91f64.sqrt())).abs() < 1e-11);
        assert!(((mu.cdf)(0.5) - 2.0 / 3.0).abs() < 1e-10);
        let sq = SymbolFn::angular(|s| s * s);
        let nu = limit_measure_nu(&ev, &sq).unwrap();
        assert!((nu.mass_constant - 2.0 / 3.0).abs() < 1e-10);
        assert!(((nu.density)(0.4) - 1.5 * 0.16).abs() < 1e-9);
        assert!(((nu.cdf)(1.0) - 1.0).abs() < 1e-10);
        let one = limit_measure_nu(&ev, &SymbolFn::one()).unwrap();
        assert!(((one.density)(-0.7) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn legendre_nu_for_constant_symbol_is_uniform() {
        let nu = legendre_nu(6, &SymbolFn::one()).unwrap();
        for &(_, w) in nu.atoms() {
            assert!((w - 1.0 / 13.0).abs() < 1e-12);
        }
        let sq = legendre_nu(1, &SymbolFn::angular(|s| s * s)).unwrap();
        let w: Vec<f64> = sq.atoms().iter().map(|a| a.1).collect();
        assert!((w[0] - 0.5).abs() < 1e-15 && w[1] == 0.0);
    }

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<(usize, f64)> = [10usize, 20, 40]
            .iter()
            .map(|&l| (l, 3.0 / l as f64))
            .collect();
        let fit = DecayFit::from_points(&pts).unwrap();
        assert!((fit.w1_exponent + 1.0).abs() < 1e-12);
        assert!((fit.w1_r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_rejects_bad_ells() {
        let ev = ActionEvaluator::with_defaults(&SurfaceProfile::round_sphere());
        assert!(convergence_sweep(&ev, &[], None, NormSource::Legendre).is_err());
        assert!(convergence_sweep(&ev, &[4, 2], None, NormSource::Legendre).is_err());
        let ell = ActionEvaluator::with_defaults(&SurfaceProfile::ellipsoid(1.3).unwrap());
        assert!(convergence_sweep(&ell, &[4], None, NormSource::Legendre).is_err());
    }
}
