use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} has degree {degree} above the declared bound {bound}")]
    DegreeBoundExceeded { vertex: usize, degree: usize, bound: usize },
    #[error("vertex count mismatch: {left} vs {right}")]
    VertexCountMismatch { left: usize, right: usize },
    #[error("n * degree must be even (n = {n}, degree = {degree})")]
    Parity { n: usize, degree: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact search infeasible: {what} of size {size} exceeds the limit {limit}")]
    ExactSearchInfeasible { what: &'static str, size: usize, limit: usize },
    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("coloring has length {got}, graph has {expected} vertices")]
    ColoringLength { got: usize, expected: usize },
    #[error("color {color} at vertex {vertex} outside 1..={k}")]
    ColorOutOfRange { vertex: usize, color: usize, k: usize },
    #[error("atom at {position} lies on a grid line of resolution {k}")]
    GridLineAtom { position: f64, k: usize },
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(usize, usize),
    #[error("empty set")]
    EmptySet,
    #[error("target outside the admissible constraint set: {0}")]
    TargetOutsideConstraints(String),
    #[error("graph is not a disjoint union of equal even cycles")]
    NotCycleUnion,
    #[error("transfer matrices need paths or cycles; component of size {0} is neither")]
    UnsupportedTopology(usize),
    #[error("operation requires a soft-core target (all edge weights positive)")]
    HardCoreRejected,
    #[error("no deletion witness within epsilon = {epsilon}: {reason}")]
    NoWitness { epsilon: f64, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
