use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The noise distribution does not make the incoherent branch proportional
    /// to a unitary phase shift.
    #[error("noise violates the phase-restoration condition (residual {residual:.3e})")]
    ConditionViolation { residual: f64 },

    #[error("degenerate noise: {0}")]
    DegenerateNoise(String),

    #[error("enumeration needs {terms} terms, budget is {budget}")]
    ResourceLimit { terms: u128, budget: u128 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
