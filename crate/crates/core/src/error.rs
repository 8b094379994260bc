use thiserror::Error;

use crate::vars::VarId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{n_causes} causes exceeds the configured ceiling of {ceiling}")]
    Capacity { n_causes: usize, ceiling: usize },

    /// A conditioning event has zero probability. The caller should smooth the
    /// joint so that every configuration of the causes has positive mass.
    #[error("positivity violated: conditioning event {event} has probability {mass:e}")]
    Positivity { event: String, mass: f64 },

    #[error("P(Y | do({vars})) is not identifiable from the known structure: {reason}")]
    Identifiability { vars: String, reason: String },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("no rows observed for configuration {config}")]
    InsufficientData { config: String },

    #[error("variable {0} has more than one single-variable constraint")]
    Ambiguity(VarId),

    #[error("ROC needs at least one positive and one negative label")]
    DegenerateLabels,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),
}
