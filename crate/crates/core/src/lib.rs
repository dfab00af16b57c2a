//! Action-angle data, separated joint eigenfunctions and equator
//! empirical measures on convex surfaces of revolution.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actions;
pub mod error;
pub mod legendre;
pub mod measures;
pub mod numerics;
pub mod spectral;
pub mod surface;
pub mod symbol;

pub use actions::{ActionConfig, ActionEvaluator, TableLayout};
pub use error::{Error, Result};
pub use measures::{ConvergenceReport, EmpiricalMeasure, LimitMeasure, NormSource};
pub use spectral::{JointSlice, RadialMode, RadialSolver, SpectralConfig};
pub use surface::SurfaceProfile;
pub use symbol::SymbolFn;
