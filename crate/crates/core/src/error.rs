use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{z} lies on the branch cut (-inf, 0] of the principal power")]
    Domain { z: Complex64 },

    #[error("gamma has a pole at {z}")]
    Pole { z: Complex64 },

    #[error("fractional order {alpha} must satisfy 0 < Re(alpha) < 1")]
    InvalidOrder { alpha: Complex64 },

    #[error("Bessel series argument |z| = {modulus} exceeds the configured radius {radius}")]
    SeriesRadius { modulus: f64, radius: f64 },

    #[error("Bessel order {order} is too close to an integer (|sin(order*pi)| < 1e-8)")]
    DegenerateOrder { order: Complex64 },

    #[error("{what} did not converge after {evaluations} evaluations (last change {last_change:e})")]
    NonConvergence {
        what: &'static str,
        evaluations: usize,
        last_change: f64,
    },

    #[error("dimension mismatch: operator has dimension {expected}, vector has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("(lambda + A) is singular at lambda = {lambda}")]
    Singular { lambda: Complex64 },

    #[error("non-negativity violated: resolvent failed at lambda = {lambda:e}")]
    NonNegativity { lambda: f64 },

    #[error("eigenbasis is ill-conditioned (condition number {condition:e}); refusing the spectral route")]
    IllConditioned { condition: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("extrapolation fit failed: {0}")]
    FitFailure(String),

    #[error("analytic derivative disagrees with finite difference by {discrepancy:e} (allowed {allowed:e})")]
    CrossCheck { discrepancy: f64, allowed: f64 },

    #[error("Re(alpha) = {re_alpha} exceeds the extraction guard {guard}")]
    AlphaGuard { re_alpha: f64, guard: f64 },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Singular { .. }
                | Error::NonNegativity { .. }
                | Error::IllConditioned { .. }
                | Error::NonFinite(_)
                | Error::FitFailure(_)
                | Error::CrossCheck { .. }
                | Error::SeriesRadius { .. }
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
