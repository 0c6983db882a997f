//! Error type shared by every numerical operation in the crate.

/// Errors raised by potential evaluation, quadrature, root finding and
/// trajectory integration.
///
/// The distinction between variants matters to callers: `Domain`,
/// `Singularity`, `FieldDiscontinuity` and `Precondition` mean the requested
/// point or argument lies outside the mathematical domain of the operation,
/// while `Convergence` and `IntegrationFailure` mean the algorithm gave up
/// before reaching its tolerance.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Argument outside the domain of a special function or operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation point sits on a genuine singularity of the field
    /// (on the wire, or on a plate edge circle).
    #[error("singularity: {0}")]
    Singularity(String),

    /// The gradient was requested on a plate, where its normal component
    /// jumps by `4*pi*G*sigma` across the surface.
    #[error("gradient discontinuous on plate (normal jump {jump:e})")]
    FieldDiscontinuity {
        /// Magnitude of the one-sided normal-derivative jump, `4*pi*G*sigma`.
        jump: f64,
    },

    /// An iterative scheme exhausted its budget before reaching tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A bracketing interval does not actually bracket what it claims to.
    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    /// A documented operation precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Adaptive step size underflowed; carries the last valid state.
    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure {
        t: f64,
        state: Vec<f64>,
        reason: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn singularity(msg: impl Into<String>) -> Self {
        Error::Singularity(msg.into())
    }
}
