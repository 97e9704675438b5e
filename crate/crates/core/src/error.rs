use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("evolution time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("integration step {dt} too large for duration {t} (need dt <= t/1000)")]
    StepTooLarge { dt: f64, t: f64 },

    #[error("no unique steady state: spectral radius of the cycle map is {spectral_radius}")]
    NoUniqueSteadyState { spectral_radius: f64 },

    #[error("fixed-point iteration did not converge within {iterations} iterations")]
    MaxItersExceeded { iterations: u64 },

    #[error("state violates the uncertainty bound (det = {det})")]
    UnphysicalState { det: f64 },

    #[error("heat ledger inconsistent: Q_C from energy balance {from_balance} vs from cold steps {from_cold_steps}")]
    LedgerInconsistent { from_balance: f64, from_cold_steps: f64 },

    #[error("no coefficient of performance in the trivial phase")]
    TrivialPhase,

    #[error("parameter out of domain: {0}")]
    ParameterOutOfDomain(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
