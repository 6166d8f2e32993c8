use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LchiError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pole of {function} at s = {sigma} + {t}i")]
    Pole {
        function: &'static str,
        sigma: f64,
        t: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("too close to a zero of L(s, chi) at s = {sigma} + {t}i (|L| = {modulus:e})")]
    NearZero { sigma: f64, t: f64, modulus: f64 },

    #[error("phase continuation failed at t = {t}: imaginary residue {residue:e}")]
    PhaseContinuation { t: f64, residue: f64 },

    #[error("zero list covers ordinates up to {available}, but {required} is required")]
    InsufficientZeroCoverage { required: f64, available: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("fit undefined: {0}")]
    UndefinedFit(String),
}

pub type Result<T> = std::result::Result<T, LchiError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LchiError::InvalidArgument(msg.into()))
}
