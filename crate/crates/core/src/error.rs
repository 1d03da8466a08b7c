use thiserror::Error;

use crate::dsl::DslError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dsl(#[from] DslError),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("no scm named `{0}`")]
    UnknownScm(String),

    #[error("no query named `{0}`")]
    UnknownQuery(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid intervention on `{name}`: {reason}")]
    InvalidIntervention { name: String, reason: String },

    #[error("evidence has zero probability")]
    ZeroEvidence,

    #[error("positivity violation: P({event}) = 0 but the stratum {stratum} has positive weight")]
    Positivity { event: String, stratum: String },

    #[error("non-descendants of the empty set are undefined")]
    EmptyInterventionSet,

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("model has no label")]
    NoLabel,

    #[error("{file}:{source}")]
    Load { file: String, source: DslError },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
