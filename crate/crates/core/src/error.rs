use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the subsystem that raises
/// them; error data carries enough context to act on (indices, measured
/// values, budgets).
#[derive(Debug, Error)]
pub enum Error {
    #[error("adjacency matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("adjacency entry ({row}, {col}) = {value}, expected 0 or 1")]
    NonBinaryEntry { row: usize, col: usize, value: f64 },

    #[error("graphs must have at least one vertex")]
    EmptyGraph,

    #[error("vertex {0} has no self-loop")]
    MissingSelfLoop(usize),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    SolverNoConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("bad vertex labeling: {0}")]
    BadLabeling(String),

    #[error("expected {expected} vertices, found {found}")]
    WrongVertexCount { expected: usize, found: usize },

    #[error("element geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("node ({q},{z},{t}) used by more than one self-loop or edge")]
    NodeConflict { q: u32, z: u8, t: u8 },

    #[error("node ({q},{z},{t}) is not exposed by a diagram element with label {label}")]
    IllegalNodeForLabel { q: u32, z: u8, t: u8, label: String },

    #[error("node references element {q} but the diagram has {r} elements")]
    DanglingElementIndex { q: u32, r: u32 },

    #[error("diagram/element geometry mismatch: {0}")]
    ElementGeometryMismatch(String),

    #[error("sector weight {n} is invalid for {k} vertices")]
    BadWeight { n: usize, k: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("problem size {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("operator is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.6e} < -{threshold:.3e}")]
    NotPsd { min_eigenvalue: f64, threshold: f64 },

    #[error("basis is not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("operator has an empty nullspace")]
    EmptyNullspace,

    #[error("restriction has no nonzero eigenvalue; its gamma is undefined")]
    ZeroRestriction,

    #[error("input must be positive: {0}")]
    NonPositiveInput(String),

    #[error("reduction requires alpha = {expected}, instance has alpha = {found}")]
    AlphaMismatch { expected: u32, found: u32 },

    #[error("compiled diagram is not a ground-energy-conforming gate graph: mu = {mu:.12} but element ground energy is {expected:.12}")]
    NotE1GateGraph { mu: f64, expected: f64 },

    #[error("instance violates a problem invariant: {0}")]
    BadInstance(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
