use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rejected profile: {invariant} ({detail})")]
    RejectedProfile { invariant: String, detail: String },

    /// |c| reaches the tangential threshold E·a(r₀); the torus is singular.
    #[error("degenerate torus at c = {c}, E = {energy}")]
    DegenerateTorus { c: f64, energy: f64 },

    #[error("(c = {c}, value = {value}) lies outside the moment image")]
    OutsideMomentImage { c: f64, value: f64 },

    #[error("c = {0} is outside the open interval (-1, 1)")]
    OutsideOpenInterval(f64),

    #[error("labeling failure: m = {m}, expected {expected} nodes, found {found}")]
    LabelingFailure {
        m: i64,
        expected: usize,
        found: usize,
    },

    #[error("resolution error: {points_per_wavelength:.2} points per wavelength at lambda = {lambda:.4} (need >= 10)")]
    Resolution {
        lambda: f64,
        points_per_wavelength: f64,
    },

    #[error("degenerate measure: all weights vanish")]
    DegenerateMeasure,

    #[error("phase-space symbols have no quantization in this toolkit")]
    UnsupportedQuantization,

    #[error("signed measure: total mass {0}")]
    SignedMeasure(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
