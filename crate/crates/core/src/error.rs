use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("unknown map family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("requested order {requested} exceeds the maximum order {max}")]
    OrderExceeded { requested: usize, max: usize },

    #[error("jets are not compatible: {0}")]
    MismatchedJets(String),

    #[error("division by a jet whose value is zero")]
    DivisionByZero,

    #[error("point is outside the domain of the map: {0}")]
    OutsideDomain(String),

    #[error("finite-difference stencil leaves the domain: {0}")]
    StencilOutsideDomain(String),

    #[error("compact box is empty")]
    EmptyBox,

    #[error("r vanishes at a point where 1 - chi is nonzero: {0}")]
    DegenerateR(String),

    #[error("quadrature tolerance {target:e} not reached; achieved estimate {achieved:e}")]
    ToleranceNotReached { target: f64, achieved: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("time {t} is beyond the observed horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
