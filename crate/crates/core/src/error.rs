use thiserror::Error;

/// Errors raised while reading or validating a model document.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error("parent array has length {found}, expected n + 1 = {expected}")]
    ParentLength { expected: usize, found: usize },
    #[error("root node 0 must have a null parent")]
    RootHasParent,
    #[error("node {node} has no parent; only the root may be parentless")]
    MissingParent { node: usize },
    #[error("node index {index} out of range 0..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("directed part is not a tree: node {node} lies on a cycle or is unreachable from the root")]
    NotATree { node: usize },
    #[error("bidirected self-loop at node {node}")]
    SelfLoop { node: usize },
    #[error("bidirected edge {{{i},{j}}} listed twice")]
    DuplicateBidirected { i: usize, j: usize },
}

/// Errors raised by polynomial identity testing sessions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PitError {
    #[error("error budget exhausted after {tests} tests: target error probability {target:e} can no longer be guaranteed")]
    BudgetExhausted { tests: u64, target: f64 },
    #[error("declared degree {degree} exceeds the session bound {bound}")]
    DegreeExceeded { degree: u64, bound: u64 },
    #[error("invalid session parameters: {0}")]
    InvalidParameters(String),
}

/// Errors raised by the identification pipeline.
#[derive(Debug, Error)]
pub enum IdentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pit(#[from] PitError),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate propagation across missing edge {{{i},{j}}}: denominator vanishes identically")]
    DegeneratePropagation { i: usize, j: usize },
}

/// Errors raised by the brute-force oracle.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle size guard exceeded: {what} = {value} > {limit}")]
    SizeGuard { what: &'static str, value: usize, limit: usize },
    #[error("covariances are inconsistent with the model: {0}")]
    Inconsistent(String),
    #[error("non-generic ground truth point: {0}")]
    Degenerate(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}
