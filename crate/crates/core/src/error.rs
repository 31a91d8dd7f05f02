use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Faces whose traceback cells collapse or invert, and the largest step that avoids it.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFailure {
    /// Indices `j` of the cells `[x_{j}, x_{j+1}]` (0-based node numbering) that degenerate.
    pub cells: Vec<usize>,
    /// Crossing time of the worst converging face pair.
    pub admissible_dt: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("point {x} lies outside [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },
    #[error("evaluation at {x} outside cell {cell}")]
    OutsideCell { x: f64, cell: usize },
    #[error("invalid integration bounds [{lo}, {hi}] for cell {cell}")]
    InvalidBounds { lo: f64, hi: f64, cell: usize },
    #[error("target nodes must be strictly increasing (violated at node {0})")]
    NonIncreasingNodes(usize),
    #[error("target cell {0} has (near) zero width")]
    DegenerateCell(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("periodic target span {span} differs from domain span {domain}")]
    SpanMismatch { span: f64, domain: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("traceback partition degenerates in cells {:?}; admissible dt = {}", .0.cells, .0.admissible_dt)]
    Partition(PartitionFailure),
    #[error("traceback partition still invalid after {halvings} step halvings")]
    PartitionExhausted { halvings: u32 },
    #[error("linear solver failure: {0}")]
    Solver(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate distribution: number density {0} is not positive")]
    DegenerateDistribution(f64),
}
