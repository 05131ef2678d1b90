use crate::state::StateId;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The model's accessors contradict their own contract.
    #[error("model definition error at state {witness}: {message}")]
    ModelDefinition { witness: StateId, message: String },

    #[error("truncation too small: X_r is empty for r = {r}{}", .minimal_r.map(|m| format!(" (smallest non-empty window at r = {m})")).unwrap_or_default())]
    TruncationTooSmall { r: u64, minimal_r: Option<u64> },

    #[error("objective `{objective}` cannot be evaluated at state {witness}")]
    ObjectiveNotEvaluable { objective: String, witness: StateId },

    #[error("objective `{objective}` contradicts its sign certificate at state {witness}")]
    SignCertificateViolated { objective: String, witness: StateId },

    #[error("envelope required: objective `{0}` has neither a tail envelope nor a finite support")]
    EnvelopeRequired(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear program is malformed: {0}")]
    MalformedLp(String),

    #[error("LP for {context} is infeasible")]
    Infeasible { context: String },

    #[error("LP for {context} is unbounded")]
    Unbounded { context: String },

    #[error("LP for {context} failed numerically: {detail}")]
    NumericalFailure { context: String, detail: String },

    #[error("oracle error: {0}")]
    Oracle(String),
}

impl Error {
    /// True for errors that come from the LP layer rather than the model or the configuration.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. } | Error::Unbounded { .. } | Error::NumericalFailure { .. }
        )
    }
}
