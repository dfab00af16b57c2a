//! Numerical building blocks shared by the geometry, action and spectral
//! layers.

pub mod chebyshev;
pub mod quadrature;
pub mod roots;
pub mod spline;
pub mod tridiag;

pub use chebyshev::{Barycentric, ChebSeries, GradedTable};
pub use quadrature::{GaussLegendre, TanhSinh};
pub use roots::{bisect, newton_bracketed, NewtonRoot};
pub use spline::{CubicSpline, EndCondition};
pub use tridiag::SymTridiag;
