//! Order-zero symbols whose torus averages (and, for the first two kinds,
//! quantum matrix elements) the toolkit can evaluate.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::surface::ScalarFn;

pub type PhaseSpaceFn = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    RadialMult,
    AngularRatio,
    PhaseSpace,
}

impl SymbolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolKind::RadialMult => "radial_mult",
            SymbolKind::AngularRatio => "angular_ratio",
            SymbolKind::PhaseSpace => "phase_space",
        }
    }
}

#[derive(Clone)]
pub enum SymbolFn {
    /// Multiplication by `b(r)`.
    RadialMult(ScalarFn),
    /// `χ(p_θ / |ξ|_g)`, quantized as `χ(D_θ (-Δ)^{-1/2})`.
    AngularRatio(ScalarFn),
    /// General `σ(r, θ, ρ, η)`, homogeneous of degree 0 in `(ρ, η)`.
    PhaseSpace(PhaseSpaceFn),
}

impl fmt::Debug for SymbolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolFn::{}", self.kind().as_str())
    }
}

impl SymbolFn {
    pub fn radial(b: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SymbolFn::RadialMult(Arc::new(b))
    }

    pub fn angular(chi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SymbolFn::AngularRatio(Arc::new(chi))
    }

    pub fn phase_space(f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        SymbolFn::PhaseSpace(Arc::new(f))
    }

    /// The identity operator, as a radial multiplier.
    pub fn one() -> Self {
        Self::radial(|_| 1.0)
    }

    pub fn kind(&self) -> SymbolKind {
        match self {
            SymbolFn::RadialMult(_) => SymbolKind::RadialMult,
            SymbolFn::AngularRatio(_) => SymbolKind::AngularRatio,
            SymbolFn::PhaseSpace(_) => SymbolKind::PhaseSpace,
        }
    }

    /// Value at the covector `(r, θ; ρ, η)` with `|ξ|² = ρ² + η²/a(r)²`.
    pub fn eval(&self, r: f64, theta: f64, rho: f64, eta: f64, a: f64) -> f64 {
        match self {
            SymbolFn::RadialMult(b) => b(r),
            SymbolFn::AngularRatio(chi) => {
                let norm = (rho * rho + eta * eta / (a * a)).sqrt();
                chi(eta / norm)
            }
            SymbolFn::PhaseSpace(f) => f(r, theta, rho, eta),
        }
    }

    /// Samples `σ(r, θ, tρ, tη) = σ(r, θ, ρ, η)` for a phase-space symbol.
    pub fn check_homogeneity(&self, samples: &[(f64, f64, f64, f64)]) -> Result<f64> {
        let SymbolFn::PhaseSpace(f) = self else {
            return Ok(0.0);
        };
        let mut worst = 0.0_f64;
        for &(r, theta, rho, eta) in samples {
            let base = f(r, theta, rho, eta);
            for t in [0.25, 0.5, 2.0, 7.0] {
                worst = worst.max((f(r, theta, t * rho, t * eta) - base).abs());
            }
        }
        if worst > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "phase-space symbol is not homogeneous of degree 0 (deviation {worst:e})"
            )));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneity_accepts_ratio_and_rejects_norm() {
        let samples = [(0.4, 0.1, 0.3, 0.2), (1.2, 2.0, -0.7, 0.5)];
        let ratio = SymbolFn::phase_space(|_, _, rho, eta| rho / (rho * rho + eta * eta).sqrt());
        assert!(ratio.check_homogeneity(&samples).unwrap() < 1e-12);
        let norm = SymbolFn::phase_space(|_, _, rho, eta| (rho * rho + eta * eta).sqrt());
        assert!(norm.check_homogeneity(&samples).is_err());
    }

    #[test]
    fn angular_ratio_reads_momentum_ratio() {
        let s = SymbolFn::angular(|x| x);
        // |ξ| = 1 with η = 0.6, a = 1
        assert!((s.eval(0.0, 0.0, 0.8, 0.6, 1.0) - 0.6).abs() < 1e-15);
    }
}
