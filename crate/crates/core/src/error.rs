use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the named function, or an
    /// intermediate value stopped being finite.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Quadrature could not reach the requested tolerance.
    #[error("integration failed: {reason} (achieved error estimate {achieved:.3e})")]
    Integration { reason: String, achieved: f64 },

    /// The pass/fail precondition of a degree bisection does not hold.
    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("invalid precision: {0}")]
    Precision(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}
