use alloc::string::String;

use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("logic error: {0}")]
    Logic(String),
    #[error("query budget exhausted")]
    BudgetExhausted,
    #[error("no queryable candidates remain")]
    ExplorationExhausted,
    #[error("training skipped: {0}")]
    TrainingSkipped(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}: {loss}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        loss: f64,
    },
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{arcs} arcs exceeds the exact enumeration bound of {bound}")]
    EnumerationBound { arcs: usize, bound: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
