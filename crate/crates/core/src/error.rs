use thiserror::Error;

pub type Result<T> = std::result::Result<T, FreudError>;

/// Errors raised by the numerical kernels.
///
/// Variants split into two families: input validation (bad parameters, out of
/// range indices) and numerical failure (precision exhaustion, series or
/// quadrature that did not converge). [`FreudError::is_validation`] tells them
/// apart; the CLI maps them onto distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FreudError {
    #[error("pole of the gamma function at x = {0}")]
    Pole(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("series diverges: {0}")]
    Divergence(String),

    #[error("range error in {module}: {message}")]
    Range { module: &'static str, message: String },

    #[error("insufficient moments: need index {needed}, table holds up to {available}")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("insufficient recurrence coefficients: need beta_{needed}, table holds up to beta_{available}")]
    InsufficientBetas { needed: usize, available: usize },

    #[error("non-positive recurrence coefficient beta_{n} at {bits} bits (precision exhausted)")]
    NonPositive { n: usize, bits: u32 },

    #[error("precision escalation failed after {retries} retries: {message}")]
    PrecisionExhausted { retries: u32, message: String },

    #[error("{what} did not converge after {levels} levels")]
    NonConvergence { what: &'static str, levels: u32 },

    #[error("argument outside the support: {0}")]
    Domain(String),

    #[error("seed error: {0}")]
    Seed(String),
}

impl FreudError {
    pub fn range(module: &'static str, message: impl Into<String>) -> Self {
        FreudError::Range {
            module,
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            FreudError::Pole(_)
                | FreudError::Parameter(_)
                | FreudError::Domain(_)
                | FreudError::Seed(_)
                | FreudError::InsufficientMoments { .. }
                | FreudError::InsufficientBetas { .. }
        )
    }

    /// Short machine-readable tag naming the failure kind.
    pub fn kind(&self) -> &'static str {
        match self {
            FreudError::Pole(_) => "pole",
            FreudError::Parameter(_) => "parameter",
            FreudError::Divergence(_) => "divergence",
            FreudError::Range { .. } => "range",
            FreudError::InsufficientMoments { .. } => "insufficient-moments",
            FreudError::InsufficientBetas { .. } => "insufficient-betas",
            FreudError::NonPositive { .. } => "non-positive",
            FreudError::PrecisionExhausted { .. } => "precision-exhausted",
            FreudError::NonConvergence { .. } => "non-convergence",
            FreudError::Domain(_) => "domain",
            FreudError::Seed(_) => "seed",
        }
    }
}
