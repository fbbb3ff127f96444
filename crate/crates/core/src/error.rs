use thiserror::Error;

/// Errors raised by instance construction, the oracles and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty instance")]
    EmptyInstance,

    #[error("degenerate epsilon: {0}")]
    DegenerateEpsilon(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("not a 1-B instance: item {id} has size {size} with capacity {capacity}")]
    NotOneB { id: usize, size: usize, capacity: usize },

    #[error("invalid arrival order: {0}")]
    InvalidOrder(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration cap exceeded: n = {n} > {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("degenerate instance: optimal value is zero")]
    DegenerateInstance,

    #[error("solver stalled after {pivots} pivots")]
    SolverStalled { pivots: usize },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("linear program has a negative right-hand side in row {row}")]
    InfeasibleStart { row: usize },

    #[error("dual certificate infeasible for every scale (k = {k}, constraint {constraint})")]
    CertificateInfeasible { k: usize, constraint: String },
}

pub type Result<T> = std::result::Result<T, Error>;
