//! Separated joint eigenfunctions `e^{imθ} u(r) / √(2π)`.
//!
//! For each angular number `m` the radial operator
//! `u ↦ -(1/a)(a u')' + (m²/a²) u` is discretised by a flux-conservative
//! finite-volume scheme on cells of equal width covering `[0, L]`. The
//! pole faces carry the weight `a = 0`, so the pole condition is built into
//! the stencil. The resulting generalized problem `A u = λ² W u` with
//! `W = diag(a)` is symmetrised and solved rank by rank with Sturm
//! bisection, which makes the node count `n` (and with it the label
//! `ℓ = |m| + n`) the rank of the eigenvalue.

use std::sync::Arc;

use serde::Serialize;

use crate::actions::ActionEvaluator;
use crate::error::{Error, Result};
use crate::numerics::SymTridiag;
use crate::surface::SurfaceProfile;

/// Minimum resolution enforced on the finest grid.
const MIN_POINTS_PER_WAVELENGTH: f64 = 10.0;

/// Cell-centred grid on `[0, L]` with the profile sampled at faces and
/// centres.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    h: f64,
    centers: Vec<f64>,
    a_center: Vec<f64>,
    a_face: Vec<f64>,
}

impl RadialGrid {
    pub fn new(profile: &SurfaceProfile, cells: usize) -> Self {
        let l = profile.length();
        let h = l / cells as f64;
        let centers: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * h).collect();
        let a_center = centers.iter().map(|&r| profile.a(r)).collect();
        let mut a_face: Vec<f64> = (0..=cells).map(|i| profile.a(i as f64 * h)).collect();
        // The pole faces carry no flux.
        a_face[0] = 0.0;
        a_face[cells] = 0.0;
        Self {
            h,
            centers,
            a_center,
            a_face,
        }
    }

    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    fn operator(&self, m: i64) -> SymTridiag {
        let n = self.cells();
        let inv_h2 = 1.0 / (self.h * self.h);
        let m2 = (m * m) as f64;
        let diag = (0..n)
            .map(|i| {
                let a = self.a_center[i];
                (self.a_face[i] + self.a_face[i + 1]) * inv_h2 / a + m2 / (a * a)
            })
            .collect();
        let off = (0..n - 1)
            .map(|i| {
                -self.a_face[i + 1] * inv_h2 / (self.a_center[i] * self.a_center[i + 1]).sqrt()
            })
            .collect();
        SymTridiag::new(diag, off)
    }

    /// `∫ b |u|² a dr` by the midpoint rule the scheme is built on.
    fn weighted_integral(&self, u: &[f64], b: impl Fn(f64) -> f64) -> f64 {
        self.centers
            .iter()
            .zip(&self.a_center)
            .zip(u)
            .map(|((&r, &a), &ui)| b(r) * ui * ui * a)
            .sum::<f64>()
            * self.h
    }

    /// Cubic Lagrange interpolation from the four nearest centres.
    fn interpolate(&self, u: &[f64], r: f64) -> f64 {
        let n = self.cells();
        let x = r / self.h - 0.5;
        let base = (x.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
        let mut value = 0.0;
        for j in 0..4 {
            let xj = (base + j) as f64;
            let mut w = 1.0;
            for k in 0..4 {
                if k != j {
                    let xk = (base + k) as f64;
                    w *= (x - xk) / (xj - xk);
                }
            }
            value += w * u[base + j];
        }
        value
    }
}

#[derive(Debug, Clone)]
struct GridSolution {
    grid: Arc<RadialGrid>,
    lambda_sq: f64,
    /// Normalised so that `Σ u² a h = 1`.
    u: Vec<f64>,
    u_at_r0: f64,
    sign_changes: usize,
}

/// One separated eigenfunction with quantum numbers `(m, n)` and label
/// `ℓ = |m| + n`.
#[derive(Debug, Clone)]
pub struct RadialMode {
    pub m: i64,
    pub n: usize,
    pub ell: usize,
    /// Square root of the Laplace eigenvalue.
    pub lambda: f64,
    pub u_at_r0: f64,
    fine: GridSolution,
    coarse: Option<GridSolution>,
}

impl RadialMode {
    pub fn lambda_sq(&self) -> f64 {
        self.lambda * self.lambda
    }

    /// Radial profile on the solver grid.
    pub fn u(&self) -> &[f64] {
        &self.fine.u
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.fine.grid
    }

    /// Interior sign changes of the computed profile.
    pub fn sign_changes(&self) -> usize {
        self.fine.sign_changes
    }

    /// Eigenvalue of the unextrapolated scheme on the requested grid.
    pub fn raw_lambda_sq(&self) -> f64 {
        self.fine.lambda_sq
    }

    /// `∫₀^L |u|² a dr` on the solver grid.
    pub fn normalization(&self) -> f64 {
        self.fine.grid.weighted_integral(&self.fine.u, |_| 1.0)
    }

    fn extrapolate(&self, f: impl Fn(&GridSolution) -> f64) -> f64 {
        match &self.coarse {
            Some(c) => (4.0 * f(&self.fine) - f(c)) / 3.0,
            None => f(&self.fine),
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Number of cells on `[0, L]`.
    pub grid_size: usize,
    /// Combine the grid with its two-fold coarsening to cancel the leading
    /// `h²` error term.
    pub richardson: bool,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            grid_size: 4000,
            richardson: true,
        }
    }
}

/// Radial eigen-solver bound to one profile and grid.
#[derive(Debug, Clone)]
pub struct RadialSolver {
    profile: SurfaceProfile,
    config: SpectralConfig,
    fine: Arc<RadialGrid>,
    coarse: Option<Arc<RadialGrid>>,
}

impl RadialSolver {
    pub fn new(profile: &SurfaceProfile, config: SpectralConfig) -> Result<Self> {
        if config.grid_size < 500 {
            return Err(Error::InvalidParameter(format!(
                "grid_size must be at least 500, got {}",
                config.grid_size
            )));
        }
        Ok(Self::new_unchecked(profile, config))
    }

    /// Skips the minimum grid check; resolution is still enforced per mode.
    pub fn new_unchecked(profile: &SurfaceProfile, config: SpectralConfig) -> Self {
        let grid_size = config.grid_size.max(8) & !1;
        let fine = Arc::new(RadialGrid::new(profile, grid_size));
        let coarse = config
            .richardson
            .then(|| Arc::new(RadialGrid::new(profile, grid_size / 2)));
        Self {
            profile: profile.clone(),
            config: SpectralConfig {
                grid_size,
                ..config
            },
            fine,
            coarse,
        }
    }

    pub fn profile(&self) -> &SurfaceProfile {
        &self.profile
    }

    pub fn config(&self) -> SpectralConfig {
        self.config
    }

    fn solve_on(&self, grid: &Arc<RadialGrid>, op: &SymTridiag, n: usize) -> GridSolution {
        let lambda_sq = op.eigenvalue(n);
        let v = op.eigenvector(lambda_sq);
        let scale = grid.h.sqrt();
        let mut u: Vec<f64> = v
            .iter()
            .zip(&grid.a_center)
            .map(|(vi, a)| vi / (a.sqrt() * scale))
            .collect();
        let peak = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        // Orientation: positive near the north pole.
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-8 * peak) {
            if *first < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let sign_changes = count_sign_changes(&u, 1e-10 * peak);
        let u_at_r0 = grid.interpolate(&u, self.profile.r0());
        GridSolution {
            grid: grid.clone(),
            lambda_sq,
            u,
            u_at_r0,
            sign_changes,
        }
    }

    /// Mode `(m, n)`; checks the node count and the grid resolution.
    pub fn mode(&self, m: i64, n: usize) -> Result<RadialMode> {
        let op = self.fine.operator(m);
        self.mode_with(
            &op,
            self.coarse.as_ref().map(|g| (g, g.operator(m))).as_ref(),
            m,
            n,
        )
    }

    fn mode_with(
        &self,
        op: &SymTridiag,
        coarse: Option<&(&Arc<RadialGrid>, SymTridiag)>,
        m: i64,
        n: usize,
    ) -> Result<RadialMode> {
        if n >= self.fine.cells() {
            return Err(Error::InvalidParameter(format!(
                "mode index {n} exceeds grid size {}",
                self.fine.cells()
            )));
        }
        let fine = self.solve_on(&self.fine, op, n);
        let ppw = 2.0 * std::f64::consts::PI / (fine.lambda_sq.max(0.0).sqrt() * self.fine.h);
        if ppw < MIN_POINTS_PER_WAVELENGTH {
            return Err(Error::Resolution {
                lambda: fine.lambda_sq.max(0.0).sqrt(),
                points_per_wavelength: ppw,
            });
        }
        if fine.sign_changes != n {
            return Err(Error::LabelingFailure {
                m,
                expected: n,
                found: fine.sign_changes,
            });
        }
        let coarse = coarse.map(|(grid, cop)| self.solve_on(grid, cop, n));
        let mut mode = RadialMode {
            m,
            n,
            ell: m.unsigned_abs() as usize + n,
            lambda: 0.0,
            u_at_r0: 0.0,
            fine,
            coarse,
        };
        mode.lambda = mode.extrapolate(|s| s.lambda_sq).max(0.0).sqrt();
        mode.u_at_r0 = mode.extrapolate(|s| s.u_at_r0);
        Ok(mode)
    }

    /// The `n_max + 1` lowest modes for angular number `m`.
    pub fn radial_modes(&self, m: i64, n_max: usize) -> Result<Vec<RadialMode>> {
        let op = self.fine.operator(m);
        let coarse = self.coarse.as_ref().map(|g| (g, g.operator(m)));
        (0..=n_max)
            .map(|n| self.mode_with(&op, coarse.as_ref(), m, n))
            .collect()
    }

    /// All `2ℓ + 1` joint eigenfunctions with label `ℓ`.
    pub fn joint_slice(&self, ell: usize) -> Result<JointSlice> {
        if ell < 1 {
            return Err(Error::InvalidParameter("ell must be at least 1".into()));
        }
        let ms: Vec<usize> = (0..=ell).collect();
        let solve = |&am: &usize| self.mode(am as i64, ell - am);
        #[cfg(feature = "parallel")]
        let half: Vec<Result<RadialMode>> = {
            use rayon::prelude::*;
            ms.par_iter().map(solve).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let half: Vec<Result<RadialMode>> = ms.iter().map(solve).collect();
        let half = half.into_iter().collect::<Result<Vec<_>>>()?;

        let mut modes = Vec::with_capacity(2 * ell + 1);
        for mode in half.iter().skip(1).rev() {
            // The radial problem depends on m² only.
            let mut mirrored = mode.clone();
            mirrored.m = -mode.m;
            modes.push(mirrored);
        }
        modes.extend(half);
        let restricted_norms = modes
            .iter()
            .map(|mode| restricted_norm(mode, &self.profile))
            .collect();
        Ok(JointSlice {
            ell,
            modes,
            restricted_norms,
        })
    }
}

fn count_sign_changes(u: &[f64], floor: f64) -> usize {
    let mut changes = 0;
    let mut last = 0.0;
    for &x in u {
        if x.abs() <= floor {
            continue;
        }
        let s = x.signum();
        if last != 0.0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

/// Modes of one label `ℓ`, ordered by `m = -ℓ..=ℓ`.
#[derive(Debug, Clone)]
pub struct JointSlice {
    pub ell: usize,
    pub modes: Vec<RadialMode>,
    /// `‖φ^ℓ_m‖²` on the equator, aligned with `modes`.
    pub restricted_norms: Vec<f64>,
}

impl JointSlice {
    pub fn mode(&self, m: i64) -> Option<&RadialMode> {
        let idx = m + self.ell as i64;
        (idx >= 0).then(|| self.modes.get(idx as usize)).flatten()
    }

    /// One row per mode for CSV emission.
    pub fn rows(&self, ev: Option<&ActionEvaluator>) -> Vec<SliceRow> {
        self.modes
            .iter()
            .zip(&self.restricted_norms)
            .map(|(mode, &norm)| SliceRow {
                ell: self.ell,
                m: mode.m,
                n: mode.n,
                lambda: mode.lambda,
                restricted_norm: norm,
                ebk_residual: ev.and_then(|ev| ebk_residual(mode, ev).ok()),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SliceRow {
    pub ell: usize,
    pub m: i64,
    pub n: usize,
    pub lambda: f64,
    pub restricted_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ebk_residual: Option<f64>,
}

/// `‖φ‖²_{L²(H)} = a(r₀)·|u(r₀)|²` for `φ = e^{imθ} u / √(2π)` and
/// `dS = a(r₀) dθ`.
pub fn restricted_norm(mode: &RadialMode, profile: &SurfaceProfile) -> f64 {
    profile.a_r0() * mode.u_at_r0 * mode.u_at_r0
}

/// `⟨bφ, φ⟩` for multiplication by a radial function.
pub fn matrix_element_radial(mode: &RadialMode, b: impl Fn(f64) -> f64) -> f64 {
    mode.extrapolate(|s| s.grid.weighted_integral(&s.u, &b))
}

/// `⟨χ(D_θ (-Δ)^{-1/2}) φ, φ⟩ = χ(m/λ)`.
pub fn matrix_element_angular(mode: &RadialMode, chi: impl Fn(f64) -> f64) -> Result<f64> {
    if !(mode.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "angular symbol needs lambda > 0 (m = {}, n = {})",
            mode.m, mode.n
        )));
    }
    Ok(chi(mode.m as f64 / mode.lambda))
}

/// `λ - K(m, ℓ + 1/2)`.
pub fn ebk_residual(mode: &RadialMode, ev: &ActionEvaluator) -> Result<f64> {
    let k = ev.energy_k(mode.m as f64, mode.ell as f64 + 0.5)?;
    Ok(mode.lambda - k)
}
