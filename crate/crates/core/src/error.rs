use thiserror::Error;

/// Errors raised by the solvers, mechanisms and bound formulas.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid concentration family: {0}")]
    InvalidFamily(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("value outside the domain: {0}")]
    Domain(String),

    #[error("unsupported parity: {0}")]
    Parity(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("the mechanism needs at least one report")]
    NoReports,

    #[error("regime error: {0}")]
    Regime(String),

    #[error("no truthful mechanism has a bounded ratio when every report fits in one facility (n_r = {n_r} <= c = {c})")]
    NoBoundedMechanism { c: usize, n_r: usize },

    #[error("unsupported query plan: {0}")]
    UnsupportedPlan(String),

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("infeasible outcome: {0}")]
    InfeasibleOutcome(String),
}

impl Error {
    /// Stable diagnostic code, used by the command line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "E_DISTRIBUTION",
            Error::InvalidFamily(_) => "E_FAMILY",
            Error::InvalidInstance(_) => "E_INSTANCE",
            Error::Domain(_) => "E_DOMAIN",
            Error::Parity(_) => "E_PARITY",
            Error::Dimension { .. } => "E_DIMENSION",
            Error::NoReports => "E_NO_REPORTS",
            Error::Regime(_) => "E_REGIME",
            Error::NoBoundedMechanism { .. } => "E_NO_BOUNDED_MECHANISM",
            Error::UnsupportedPlan(_) => "E_UNSUPPORTED_PLAN",
            Error::Unsupported(_) => "E_UNSUPPORTED",
            Error::InfeasibleOutcome(_) => "E_INFEASIBLE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
