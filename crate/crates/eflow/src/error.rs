use thiserror::Error;

/// Errors produced by graph construction, solvers, the SDD reduction and the
/// text input formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop at vertex {vertex}")]
    SelfLoop { vertex: usize },

    #[error("edge ({a}, {b}) has non-positive or non-finite resistance {resistance}")]
    NonpositiveResistance { a: usize, b: usize, resistance: f64 },

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("flow is infeasible for the given demands (max residual {residual:e})")]
    InfeasibleFlow { residual: f64 },

    #[error("graph is not connected")]
    GraphDisconnected,

    #[error("given edges do not form a spanning tree: {reason}")]
    InvalidTreeEdges { reason: String },

    #[error("demand vector does not sum to zero (sum {sum:e})")]
    DemandNotBalanced { sum: f64 },

    #[error("edge {edge} is not an off-tree edge")]
    NotOffTree { edge: usize },

    #[error("graph has no off-tree edges to sample")]
    NoOffTreeEdges,

    #[error("tree scaling factor {kappa} must be >= 1")]
    BadScale { kappa: f64 },

    #[error("tree decomposition requires at least 2 vertices, got {n}")]
    TooSmall { n: usize },

    #[error("matrix is not symmetric: A[{i}][{j}] = {a} but A[{j}][{i}] = {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("matrix is not diagonally dominant: row {row} has diagonal {diagonal} < off-diagonal sum {off_sum}")]
    NotDiagonallyDominant { row: usize, diagonal: f64, off_sum: f64 },

    #[error("SDD decomposition invariant violated: {reason}")]
    DecompositionInvariantViolated { reason: String },

    #[error("system is inconsistent: component demand sums to {sum:e}")]
    InconsistentSystem { sum: f64 },

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("matrix input is not a consistent Laplacian: {reason}")]
    InconsistentLaplacian { reason: String },

    #[error("vector has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("instance dimension {n} exceeds dense oracle cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
