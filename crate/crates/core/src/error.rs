use alloc::string::String;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("no supervised rows")]
    NoSupervisedRows,
    #[error("node {node} out of range for graph with {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("no labeled source nodes")]
    NoLabeledSource,
    #[error("budget k={budget} exceeds the unlabeled pool of {pool} nodes")]
    BudgetExceedsPool { budget: usize, pool: usize },
    #[error("non-finite loss at epoch {epoch} (supervised={supervised}, adversarial={adversarial})")]
    NonFiniteLoss {
        epoch: usize,
        supervised: f64,
        adversarial: f64,
    },
    #[error("internal error: {0}")]
    Internal(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
