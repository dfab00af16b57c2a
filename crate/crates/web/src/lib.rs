//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every entry point takes an ellipsoid aspect ratio (1 is the round
//! sphere) and returns flat `Float64Array`s that the page plots directly.

use wasm_bindgen::prelude::*;

use revtone::measures::{empirical_mu, limit_measure_mu, wasserstein1};
use revtone::spectral::ebk_residual;
use revtone::{ActionEvaluator, RadialSolver, SpectralConfig, SurfaceProfile};

const GRID_SIZE: usize = 1500;

fn err(e: revtone::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// A surface, its action data and (built on first use) its radial solver.
#[wasm_bindgen]
pub struct Surface {
    ev: ActionEvaluator,
    solver: Option<RadialSolver>,
}

#[wasm_bindgen]
impl Surface {
    #[wasm_bindgen(constructor)]
    pub fn new(aspect: f64) -> Result<Surface, JsError> {
        let profile = SurfaceProfile::ellipsoid(aspect).map_err(err)?;
        Ok(Surface {
            ev: ActionEvaluator::with_defaults(&profile),
            solver: None,
        })
    }

    /// Meridian samples `[r0, a0, r1, a1, ...]`.
    pub fn meridian(&self, points: usize) -> Vec<f64> {
        let p = self.ev.profile();
        (0..points.max(2))
            .flat_map(|k| {
                let r = p.length() * k as f64 / (points.max(2) - 1) as f64;
                [r, p.a(r)]
            })
            .collect()
    }

    /// Normalised limit density on an interior grid, as `[c, density, ...]`.
    #[wasm_bindgen(js_name = limitDensity)]
    pub fn limit_density(&self, points: usize) -> Result<Vec<f64>, JsError> {
        let m = self.ev.normalization_m().map_err(err)?;
        let n = points.max(2);
        let mut out = Vec::with_capacity(2 * n);
        for k in 1..n {
            let c = -1.0 + 2.0 * k as f64 / n as f64;
            out.push(c);
            out.push(self.ev.limit_density_unnorm(c).map_err(err)? / m);
        }
        Ok(out)
    }

    #[wasm_bindgen(js_name = massConstant)]
    pub fn mass_constant(&self) -> Result<f64, JsError> {
        self.ev.normalization_m().map_err(err)
    }

    /// Atoms of `μ_ℓ` as `[c, weight, limit cdf at c, ...]` followed by the
    /// Wasserstein-1 distance as the last entry.
    #[wasm_bindgen(js_name = equatorMeasure)]
    pub fn equator_measure(&mut self, ell: usize) -> Result<Vec<f64>, JsError> {
        let slice = self.solver()?.joint_slice(ell).map_err(err)?;
        let mu = empirical_mu(&slice).map_err(err)?;
        let limit = limit_measure_mu(&self.ev).map_err(err)?;
        let mut out: Vec<f64> = mu
            .atoms()
            .iter()
            .flat_map(|&(c, w)| [c, w, (limit.cdf)(c)])
            .collect();
        out.push(wasserstein1(&mu, &limit));
        Ok(out)
    }

    /// One row per mode of slice `ℓ`: `[m, λ, restricted norm, EBK residual, ...]`.
    pub fn spectrum(&mut self, ell: usize) -> Result<Vec<f64>, JsError> {
        let slice = self.solver()?.joint_slice(ell).map_err(err)?;
        let mut out = Vec::with_capacity(4 * slice.modes.len());
        for (mode, &w) in slice.modes.iter().zip(&slice.restricted_norms) {
            out.extend([
                mode.m as f64,
                mode.lambda,
                w,
                ebk_residual(mode, &self.ev).unwrap_or(f64::NAN),
            ]);
        }
        Ok(out)
    }
}

impl Surface {
    fn solver(&mut self) -> Result<&RadialSolver, JsError> {
        if self.solver.is_none() {
            let cfg = SpectralConfig {
                grid_size: GRID_SIZE,
                richardson: true,
            };
            self.solver = Some(RadialSolver::new(self.ev.profile(), cfg).map_err(err)?);
        }
        Ok(self.solver.as_ref().unwrap())
    }
}
