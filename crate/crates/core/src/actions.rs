//! Classical integrable structure of the geodesic flow.
//!
//! With angular momentum `c = p_θ` and energy `E = |ξ|_g`, the radial
//! momentum is `ρ(r) = √(E² − c²/a(r)²)`, real between the turning points
//! `r₁ < r₀ < r₂` where `a(r) = |c|/E`. The second action is
//!
//! ```text
//! I₂(c, E) = (1/π) ∫_{r₁}^{r₂} ρ(r) dr + |c|
//! ```
//!
//! which equals `E` on the round sphere. Its inverse in `E` is the energy
//! `K(c, I₂)`, homogeneous of degree one, and `ω = ∇K` is obtained from the
//! partial derivatives of `I₂` by implicit differentiation. All radial
//! integrals are evaluated with one tanh-sinh rule whose abscissas carry
//! their distance to the turning points, so `ρ` is computed without
//! cancellation where it vanishes.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::{bisect, newton_bracketed, GradedTable, TanhSinh};
use crate::surface::SurfaceProfile;
use crate::symbol::SymbolFn;

/// Relative slack used to decide that `|c|` sits on the tangential
/// threshold `E·a(r₀)`.
const THRESHOLD_SLACK: f64 = 1e-14;

/// Angular quadrature for phase-space symbols (trapezoid in θ).
const THETA_NODES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionConfig {
    /// Tanh-sinh abscissas per radial integral (at least 64).
    pub quad_nodes: usize,
    /// Relative step for finite-difference checks.
    pub fd_step: f64,
    /// Residual tolerance for the inversion `I₂(c, K) = I₂`.
    pub newton_tol: f64,
}

impl Default for ActionConfig {
    fn default() -> Self {
        Self {
            quad_nodes: 256,
            fd_step: 1e-6,
            newton_tol: 1e-11,
        }
    }
}

/// `I₂` and its partial derivatives at one `(c, E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionIntegrals {
    pub i2: f64,
    pub di2_de: f64,
    pub di2_dc: f64,
}

/// Frequency vector `(ω₁, ω₂) = ∇K` on `I₂ = 1`, with the energy there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequencies {
    pub omega1: f64,
    pub omega2: f64,
    pub energy: f64,
}

/// Layout of the piecewise Chebyshev tables used for densities in
/// `c = sin t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableLayout {
    pub levels: usize,
    pub ratio: f64,
    pub degree: usize,
}

impl Default for TableLayout {
    fn default() -> Self {
        Self {
            levels: 10,
            ratio: 0.25,
            degree: 24,
        }
    }
}

/// Tabulated `f(c)` on `(-1, 1)` through `c = sin t`, so that
/// `(1 − c²)^{-1/2}` endpoint growth becomes bounded in `t`.
#[derive(Debug, Clone)]
pub struct DensityTable {
    neg: GradedTable,
    pos: GradedTable,
    even: bool,
}

impl DensityTable {
    /// Builds the table of `f` (evaluated only inside `(-1, 1)`).
    pub fn build<F>(layout: TableLayout, even: bool, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let mut failure: Option<Error> = None;
        let mut side = |sign: f64| {
            GradedTable::build(0.5 * PI, layout.levels, layout.ratio, layout.degree, |t| {
                let (s, cos_t) = t.sin_cos();
                match f(sign * s) {
                    Ok(v) => v * cos_t,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            })
        };
        let pos = side(1.0);
        let neg = if even { pos.clone() } else { side(-1.0) };
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Self { neg, pos, even })
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    /// `∫_{-1}^{1} f(c) dc`.
    pub fn total(&self) -> f64 {
        self.neg.total() + self.pos.total()
    }

    /// `∫_{-1}^{c} f`.
    pub fn cumulative(&self, c: f64) -> f64 {
        let c = c.clamp(-1.0, 1.0);
        if c >= 0.0 {
            self.neg.total() + self.pos.integral_to(c.asin())
        } else {
            self.neg.total() - self.neg.integral_to((-c).asin())
        }
    }

    /// Interpolated `f(c)` for `|c| < 1`.
    pub fn value(&self, c: f64) -> f64 {
        let t = c.abs().min(1.0).asin();
        let g = if c >= 0.0 {
            self.pos.eval(t)
        } else {
            self.neg.eval(t)
        };
        g / t.cos()
    }

    /// Largest trailing Chebyshev coefficient over all panels.
    pub fn tail(&self) -> f64 {
        self.neg.tail().max(self.pos.tail())
    }
}

/// Action-angle machinery for one profile. Immutable apart from the lazily
/// built limit-density table, which is computed once behind a `OnceLock`.
#[derive(Debug)]
pub struct ActionEvaluator {
    profile: SurfaceProfile,
    config: ActionConfig,
    rule: TanhSinh,
    layout: TableLayout,
    mu_table: OnceLock<Result<DensityTable>>,
}

impl Clone for ActionEvaluator {
    fn clone(&self) -> Self {
        Self {
            profile: self.profile.clone(),
            config: self.config,
            rule: self.rule.clone(),
            layout: self.layout,
            mu_table: OnceLock::new(),
        }
    }
}

enum Regime {
    Zero,
    Regular,
    Tangential,
}

impl ActionEvaluator {
    pub fn new(profile: &SurfaceProfile, config: ActionConfig) -> Result<Self> {
        if config.quad_nodes < 64 {
            return Err(Error::InvalidParameter(format!(
                "quad_nodes must be at least 64, got {}",
                config.quad_nodes
            )));
        }
        if !(config.fd_step > 0.0 && config.fd_step < 0.1) {
            return Err(Error::InvalidParameter(format!(
                "fd_step must lie in (0, 0.1), got {}",
                config.fd_step
            )));
        }
        if !(config.newton_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "newton_tol must be positive, got {}",
                config.newton_tol
            )));
        }
        Ok(Self {
            profile: profile.clone(),
            rule: TanhSinh::new(config.quad_nodes),
            config,
            layout: TableLayout::default(),
            mu_table: OnceLock::new(),
        })
    }

    pub fn with_defaults(profile: &SurfaceProfile) -> Self {
        Self::new(profile, ActionConfig::default()).expect("default configuration is valid")
    }

    /// Replaces the table layout used for normalisation and CDFs.
    pub fn with_layout(mut self, layout: TableLayout) -> Self {
        self.layout = layout;
        self.mu_table = OnceLock::new();
        self
    }

    pub fn profile(&self) -> &SurfaceProfile {
        &self.profile
    }

    pub fn config(&self) -> ActionConfig {
        self.config
    }

    pub fn layout(&self) -> TableLayout {
        self.layout
    }

    fn regime(&self, c: f64, energy: f64) -> Result<Regime> {
        if !(energy > 0.0) || !energy.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "energy must be positive and finite (c = {c}, E = {energy})"
            )));
        }
        let threshold = energy * self.profile.a_r0();
        let ac = c.abs();
        if ac > threshold * (1.0 + THRESHOLD_SLACK) {
            return Err(Error::OutsideMomentImage { c, value: energy });
        }
        if ac >= threshold * (1.0 - THRESHOLD_SLACK) {
            return Ok(Regime::Tangential);
        }
        if c == 0.0 {
            return Ok(Regime::Zero);
        }
        Ok(Regime::Regular)
    }

    /// Solutions `r₁ < r₀ < r₂` of `a(r) = |c|/E`; `(0, L)` for `c = 0`.
    pub fn turning_points(&self, c: f64, energy: f64) -> Result<(f64, f64)> {
        match self.regime(c, energy) {
            Ok(Regime::Zero) => Ok((0.0, self.profile.length())),
            Ok(Regime::Regular) => {
                let target = c.abs() / energy;
                let p = &self.profile;
                let f = |r: f64| p.a(r) - target;
                let r1 = bisect(f, 0.0, p.r0(), 0.0);
                let r2 = bisect(f, p.r0(), p.length(), 0.0);
                match (r1, r2) {
                    (Some(r1), Some(r2)) => Ok((r1, r2)),
                    _ => Err(Error::Numerical(format!(
                        "turning points not bracketed at c = {c}, E = {energy}"
                    ))),
                }
            }
            Ok(Regime::Tangential) | Err(Error::OutsideMomentImage { .. }) => {
                Err(Error::DegenerateTorus { c, energy })
            }
            Err(e) => Err(e),
        }
    }

    /// Visits the quadrature nodes on `[r₁, r₂]` as `(r, a(r), ρ(r), w)`.
    fn sweep<F>(&self, c_abs: f64, energy: f64, r1: f64, r2: f64, mut f: F)
    where
        F: FnMut(f64, f64, f64, f64),
    {
        let p = &self.profile;
        let target = c_abs / energy;
        let (_, d1_lo, d2_lo) = p.eval_all(r1);
        let (_, d1_hi, d2_hi) = p.eval_all(r2);
        // Below this distance from a turning point, a(r) − a(r_i) is taken
        // from its second-order Taylor expansion.
        let near = (1e-5 * p.length()).min(0.25 * (r2 - r1));
        let e2 = energy * energy;
        self.rule.for_each_node(r1, r2, |r, dl, dr, w| {
            let (a, delta) = if dl <= dr && dl < near {
                let d = d1_lo * dl + 0.5 * d2_lo * dl * dl;
                (target + d, d)
            } else if dr < dl && dr < near {
                let d = -d1_hi * dr + 0.5 * d2_hi * dr * dr;
                (target + d, d)
            } else {
                let a = p.a(r);
                (a, a - target)
            };
            let x = delta / target;
            let g = e2 * x * (2.0 + x) / ((1.0 + x) * (1.0 + x));
            if g > 0.0 && g.is_finite() {
                f(r, a, g.sqrt(), w);
            }
        });
    }

    /// `I₂`, `∂I₂/∂E` and `∂I₂/∂c` at a regular point.
    pub fn integrals(&self, c: f64, energy: f64) -> Result<ActionIntegrals> {
        match self.regime(c, energy)? {
            Regime::Zero => {
                let l = self.profile.length();
                Ok(ActionIntegrals {
                    i2: energy * l / PI,
                    di2_de: l / PI,
                    di2_dc: 0.0,
                })
            }
            Regime::Tangential => Err(Error::DegenerateTorus { c, energy }),
            Regime::Regular => {
                let (r1, r2) = self.turning_points(c, energy)?;
                let ac = c.abs();
                let (mut s_rho, mut s_de, mut s_dc) = (0.0, 0.0, 0.0);
                self.sweep(ac, energy, r1, r2, |_, a, rho, w| {
                    s_rho += w * rho;
                    s_de += w / rho;
                    s_dc += w / (a * a * rho);
                });
                Ok(ActionIntegrals {
                    i2: s_rho / PI + ac,
                    di2_de: energy * s_de / PI,
                    di2_dc: c.signum() * (1.0 - ac * s_dc / PI),
                })
            }
        }
    }

    /// `I₂(c, E)`; equals `|c|` on the tangential threshold.
    pub fn action_i2(&self, c: f64, energy: f64) -> Result<f64> {
        match self.regime(c, energy)? {
            Regime::Tangential => Ok(c.abs()),
            _ => Ok(self.integrals(c, energy)?.i2),
        }
    }

    pub fn di2_de(&self, c: f64, energy: f64) -> Result<f64> {
        Ok(self.integrals(c, energy)?.di2_de)
    }

    pub fn di2_dc(&self, c: f64, energy: f64) -> Result<f64> {
        Ok(self.integrals(c, energy)?.di2_dc)
    }

    /// The energy `K(c, I₂)`: the unique `E` with `I₂(c, E) = i2`.
    pub fn energy_k(&self, c: f64, i2: f64) -> Result<f64> {
        let ac = c.abs();
        if !(i2 > 0.0) || !i2.is_finite() || ac > i2 * (1.0 + THRESHOLD_SLACK) {
            return Err(Error::OutsideMomentImage { c, value: i2 });
        }
        let a0 = self.profile.a_r0();
        if ac >= i2 * (1.0 - THRESHOLD_SLACK) {
            return Ok(ac / a0);
        }
        let l = self.profile.length();
        if c == 0.0 {
            return Ok(PI * i2 / l);
        }
        let lo = ac / a0 * (1.0 + THRESHOLD_SLACK);
        if self.action_i2(c, lo)? >= i2 {
            return Ok(lo);
        }
        let mut hi = (2.0 * lo).max(2.0 * PI * i2 / l);
        let mut grown = 0;
        while self.action_i2(c, hi)? <= i2 {
            hi *= 2.0;
            grown += 1;
            if grown > 200 {
                return Err(Error::Numerical(format!(
                    "no upper bracket for K at c = {c}, I2 = {i2}"
                )));
            }
        }
        let start = lo + (i2 - ac) * PI / l;
        let mut failure = None;
        let tol = self.config.newton_tol * i2.max(1.0);
        let root = newton_bracketed(
            |e| match self.integrals(c, e) {
                Ok(v) => (v.i2 - i2, v.di2_de),
                Err(err) => {
                    failure.get_or_insert(err);
                    (f64::NAN, f64::NAN)
                }
            },
            lo,
            hi,
            start,
            0.01 * tol,
        );
        if let Some(err) = failure {
            return Err(err);
        }
        if !(root.residual.abs() <= tol) {
            return Err(Error::Numerical(format!(
                "K inversion residual {:e} exceeds {:e} at c = {c}, I2 = {i2}",
                root.residual, tol
            )));
        }
        Ok(root.root)
    }

    /// `(ω₁, ω₂) = ∇K` at `(c, 1)`.
    ///
    /// At `|c| = 1` the torus collapses onto the equator and the integrals
    /// degenerate; there `ω₂ = a(r₀)^{-2}` is returned by convention and
    /// `ω₁` follows from Euler's relation `c ω₁ + ω₂ = K(c, 1)`.
    pub fn frequencies(&self, c: f64) -> Result<Frequencies> {
        if !(c.abs() <= 1.0) {
            return Err(Error::OutsideMomentImage { c, value: 1.0 });
        }
        let a0 = self.profile.a_r0();
        if c.abs() == 1.0 {
            let omega2 = 1.0 / (a0 * a0);
            let energy = 1.0 / a0;
            return Ok(Frequencies {
                omega1: c * (energy - omega2),
                omega2,
                energy,
            });
        }
        let energy = self.energy_k(c, 1.0)?;
        let d = self.integrals(c, energy)?;
        Ok(Frequencies {
            omega1: -d.di2_dc / d.di2_de,
            omega2: 1.0 / d.di2_de,
            energy,
        })
    }

    /// One-sided limit of `ω₂(c, 1)` as `|c| → 1`: the small-oscillation
    /// frequency `√(|a''(r₀)| / a(r₀))` of the radial motion about the
    /// equator.
    pub fn omega2_tangential_limit(&self) -> f64 {
        let p = &self.profile;
        (p.d2a(p.r0()).abs() / p.a_r0()).sqrt()
    }

    /// `1 − c²/(E² a(r₀)²)` without cancellation.
    fn tangential_gap(&self, c: f64, energy: f64) -> f64 {
        let s = energy * self.profile.a_r0();
        let ac = c.abs();
        (s - ac) * (s + ac) / (s * s)
    }

    /// Unnormalised limit density `ω₂(c,1) / √(1 − c²/(K(c,1)² a(r₀)²))`.
    pub fn limit_density_unnorm(&self, c: f64) -> Result<f64> {
        if !(c.abs() < 1.0) {
            return Err(Error::OutsideOpenInterval(c));
        }
        let f = self.frequencies(c)?;
        Ok(f.omega2 / self.tangential_gap(c, f.energy).sqrt())
    }

    fn mu_table(&self) -> Result<&DensityTable> {
        self.mu_table
            .get_or_init(|| {
                DensityTable::build(self.layout, true, |c| self.limit_density_unnorm(c))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `M = ∫_{-1}^{1}` of the unnormalised limit density.
    pub fn normalization_m(&self) -> Result<f64> {
        Ok(self.mu_table()?.total())
    }

    /// Limit CDF `(1/M) ∫_{-1}^{c}` of the density.
    pub fn limit_cdf(&self, c: f64) -> Result<f64> {
        let table = self.mu_table()?;
        Ok((table.cumulative(c) / table.total()).clamp(0.0, 1.0))
    }

    /// The tabulated unnormalised limit density (built on first use).
    pub fn limit_table(&self) -> Result<&DensityTable> {
        self.mu_table()
    }

    /// Haar average of `sym` over the torus `T_c` on `I₂ = 1`.
    pub fn torus_average(&self, sym: &SymbolFn, c: f64) -> Result<f64> {
        if !(c.abs() < 1.0) {
            return Err(Error::DegenerateTorus {
                c,
                energy: f64::NAN,
            });
        }
        let f = self.frequencies(c)?;
        let energy = f.energy;
        if let SymbolFn::AngularRatio(chi) = sym {
            return Ok(chi(c / energy));
        }
        let (r1, r2) = self.turning_points(c, energy)?;
        let mut acc = 0.0;
        match sym {
            SymbolFn::RadialMult(b) => {
                if c == 0.0 {
                    self.rule
                        .for_each_node(r1, r2, |r, _, _, w| acc += w * b(r));
                } else {
                    self.sweep(c.abs(), energy, r1, r2, |r, _, rho, w| {
                        acc += w * b(r) * energy / rho;
                    });
                }
                Ok(f.omega2 * acc / PI)
            }
            SymbolFn::PhaseSpace(sigma) => {
                let thetas: Vec<f64> = (0..THETA_NODES)
                    .map(|k| 2.0 * PI * k as f64 / THETA_NODES as f64)
                    .collect();
                let mut visit = |r: f64, rho: f64, w: f64| {
                    let mut s = 0.0;
                    for &th in &thetas {
                        s += sigma(r, th, rho, c) + sigma(r, th, -rho, c);
                    }
                    acc += w * s / THETA_NODES as f64 * energy / rho;
                };
                if c == 0.0 {
                    self.rule
                        .for_each_node(r1, r2, |r, _, _, w| visit(r, energy, w));
                } else {
                    self.sweep(c.abs(), energy, r1, r2, |r, _, rho, w| visit(r, rho, w));
                }
                Ok(f.omega2 * acc / (2.0 * PI))
            }
            SymbolFn::AngularRatio(_) => unreachable!(),
        }
    }

    /// Table of `c ↦ σ̂(c)` on `(-1, 1)`.
    pub fn torus_average_table(&self, sym: &SymbolFn) -> Result<DensityTable> {
        let even = matches!(sym, SymbolFn::RadialMult(_));
        DensityTable::build(self.layout, even, |c| self.torus_average(sym, c))
    }

    /// `ω(B) = ∫_{-1}^{1} σ̂(c) dc`.
    pub fn liouville_state(&self, sym: &SymbolFn) -> Result<f64> {
        Ok(self.torus_average_table(sym)?.total())
    }

    /// Centered finite difference of `I₂` along the fibre of `T*_H S²` at
    /// `I₂ = 1`, through `E(ρ) = √(ρ² + c²/a(r₀)²)`, alongside the closed
    /// form `√(1 − c²/(E² a(r₀)²)) / ω₂`. Returns `(finite difference,
    /// closed form)`.
    pub fn fibre_derivative_check(&self, c: f64) -> Result<(f64, f64)> {
        let f = self.frequencies(c)?;
        let a0 = self.profile.a_r0();
        let angular = c * c / (a0 * a0);
        let rho0 = (f.energy * f.energy - angular).max(0.0).sqrt();
        let h = self.config.fd_step * rho0.max(1e-3);
        let i2_at = |rho: f64| self.action_i2(c, (rho * rho + angular).sqrt());
        let fd = (i2_at(rho0 + h)? - i2_at(rho0 - h)?) / (2.0 * h);
        let closed = self.tangential_gap(c, f.energy).sqrt() / f.omega2;
        Ok((fd, closed))
    }
}
