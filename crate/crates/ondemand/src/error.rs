//! Crate-wide error type.

/// Errors produced by parameter validation, integration, and simulation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{0} must be non-negative")]
    NegativeValue(&'static str),
    #[error("{0} must be finite")]
    NotFinite(&'static str),
    #[error("alpha must lie in [0,1)")]
    AlphaOutOfRange,
    #[error("r must be at least 1")]
    ScaleTooSmall,

    #[error("malformed parameter line: {0:?}")]
    MalformedParamLine(String),
    #[error("unknown parameter key: {0}")]
    UnknownParamKey(String),
    #[error("duplicate parameter key: {0}")]
    DuplicateParamKey(String),
    #[error("missing parameter key: {0}")]
    MissingParamKey(&'static str),
    #[error("invalid value for {key}: {value:?}")]
    InvalidParamValue { key: String, value: String },

    #[error("not a monic-orientable cubic")]
    NotMonicOrientable,

    #[error("state outside admissible region")]
    OutsideAdmissibleRegion,
    #[error("divergence (non-finite state) at t = {t}")]
    Diverged { t: f64 },
    #[error("{0} must not exceed the horizon")]
    ExceedsHorizon(&'static str),

    #[error("trajectory grids do not match")]
    GridMismatch,
    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("total event rate is zero (absorbing state)")]
    AbsorbingState,
    #[error("initial state has a negative {0}")]
    NegativeCount(&'static str),
    #[error("target required for the actual scheme")]
    MissingTarget,
    #[error("target is only meaningful for the actual scheme")]
    UnexpectedTarget,
    #[error("{what} violated at t = {t}")]
    InvariantViolation { what: &'static str, t: f64 },
}
