use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall in two families: domain errors (bad inputs, violated
/// preconditions) and numerical failures (blow-up, non-convergence).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("argument {v} outside trajectory span [{start}, {end}]")]
    OutsideSpan { v: f64, start: f64, end: f64 },

    #[error("step size underflow at v = {v} (solution blows up or is too stiff)")]
    StepSizeUnderflow { v: f64 },

    #[error("non-positive radicand in {0}")]
    NonPositiveRadicand(&'static str),

    #[error("vanishing denominator in {0}")]
    VanishingDenominator(&'static str),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for input/precondition errors, false for numerical failures.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::Domain(_)
                | Error::OutsideSpan { .. }
                | Error::NonPositiveRadicand(_)
                | Error::VanishingDenominator(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
