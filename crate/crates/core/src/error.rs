use thiserror::Error;

/// Errors raised by the numerical core and the scenario harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("matrix is too far from orthogonal (|RᵀR - I| = {deviation:.3e})")]
    NotNearlyOrthogonal { deviation: f64 },

    #[error("matrix is numerically singular")]
    Singular,

    #[error("reference vectors are (nearly) dependent: |a x b| = {cross_norm:.3e}")]
    DependentReferences { cross_norm: f64 },

    #[error("invalid inertia: {0}")]
    InvalidInertia(String),

    #[error("gain alpha = {alpha} outside (0, {upper}) for p = {p}")]
    AlphaOutOfRange { alpha: f64, p: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("omega_max bound only available for free rotation; supply omega_max explicitly")]
    UnsupportedTorque,

    #[error("no certified basin: r(k) = {r_k} <= 0 (k = {k} <= k* = {k_star})")]
    NoCertifiedBasin { r_k: f64, k: f64, k_star: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("decay fit needs at least two positive samples in the window")]
    EmptyFitWindow,

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
