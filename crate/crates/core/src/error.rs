use thiserror::Error;

/// Failures raised by the profile, Hill and spectrum computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The two turning points of the profile coincide (constant-radius solution).
    #[error("degenerate profile: turning points coincide (min g = {min_value:e} at r = {radius})")]
    DegenerateProfile { radius: f64, min_value: f64 },

    #[error("no oscillating profile: constraint has fewer than two roots in (0, 1) (min g = {min_value:e})")]
    NoOscillation { min_value: f64 },

    #[error("integration failure at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("profile left (0, 1) at t = {t} (r = {r})")]
    DomainExit { t: f64, r: f64 },

    #[error("no sign change of r' before t = {horizon}")]
    EventNotFound { horizon: f64 },

    #[error("theta(T) - target does not change sign over c in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("grid too coarse near lambda = {lambda}; refine the grid step")]
    GridTooCoarse { lambda: f64 },

    #[error("lambda = {lambda} is not a periodic eigenvalue (|delta - 2| = {residual:e})")]
    NotAnEigenvalue { lambda: f64, residual: f64 },

    /// theta(T) / 2pi is not (close to) a rational with small denominator.
    #[error("profile does not close up: theta(T) = {theta} has no winding ratio l/m")]
    NotClosed { theta: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
