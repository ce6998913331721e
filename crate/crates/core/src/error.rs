use thiserror::Error;

/// Errors surfaced by the filtering library.
#[derive(Debug, Error)]
pub enum Error {
    /// The game configuration violates a structural constraint.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation was called outside its contract (illegal action,
    /// non-terminal utility query, deal inconsistent with constraints, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The public state is not even shaped like the output of a game:
    /// wrong bid count, duplicate placed cards, out-of-range indices.
    #[error("malformed public state: {0}")]
    MalformedPublicState(String),

    /// The public state is well-formed but provably inconsistent: no legal
    /// history can produce this observation sequence.
    #[error("inconsistent public state: {0}")]
    InconsistentPublicState(String),

    /// A history was required but the belief state is empty.
    #[error("empty belief state: no history is consistent with the public state")]
    EmptyBeliefState,

    /// A declared memory or table-size cap was exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// An internal invariant failed. Reaching this is a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
