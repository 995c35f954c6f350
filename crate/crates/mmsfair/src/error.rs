use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    Invalid(String),

    #[error("agent {agent} values edge {edge} which is not incident to her (relevance violation)")]
    RelevanceViolation { agent: usize, edge: usize },

    #[error("agent index {0} out of range 1..={1}")]
    AgentOutOfRange(usize, usize),

    #[error("subadditive table for agent {agent} has no entry for subset {subset:?}")]
    MissingTableEntry { agent: usize, subset: Vec<usize> },

    #[error("agent {agent} has maximin value 0 at d={d}: degenerate MMS, cannot normalize")]
    DegenerateMms { agent: usize, d: usize },

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("algorithm requires {required} valuations, agent {agent} has {found}")]
    AlgorithmMismatch {
        agent: usize,
        required: &'static str,
        found: &'static str,
    },

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
