use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An oracle returned a column the solver cannot use.
    #[error("malformed oracle response: {0}")]
    MalformedOracle(String),

    /// An oracle response violated its approximation contract.
    #[error("oracle contract violated: {0}")]
    OracleContract(String),

    #[error("integrality-gap verifier contract violated: v.x = {achieved}, required >= {required}")]
    VerifierContract { achieved: f64, required: f64 },

    #[error("weight vector requested with an empty active list")]
    EmptyActiveList,

    #[error("iteration cap of {cap} exceeded")]
    IterationCap { cap: usize },

    #[error("capacity exceeded: {what} (limit {limit})")]
    Capacity { what: &'static str, limit: usize },

    #[error("no player has a bundle of positive value")]
    NoDemand,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("audit error: {0}")]
    Audit(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
