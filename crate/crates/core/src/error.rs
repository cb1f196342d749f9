use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PwlError {
    #[error("dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {point:?} is not covered by any region")]
    CoverageGap { point: Vec<f64> },

    #[error("model is discontinuous: {violations} facet violation(s); run the continuity check for witnesses")]
    Discontinuous { violations: usize },

    #[error("function has no CPLR representation: {certificate}")]
    NotCplrRepresentable { certificate: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("least-squares system is rank deficient (rank {rank} < {cols} columns); use a ridge term > 0")]
    Singular { rank: usize, cols: usize },

    #[error("hinge finding produced a degenerate split after {restarts} restart(s)")]
    DegenerateSplit { restarts: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("unbounded domain: {0}")]
    Unbounded(String),

    #[error("affine set size {size} exceeds the cap of {cap}")]
    CapacityExceeded { size: usize, cap: usize },

    #[error("budget exceeded: {requested} hidden units requested, limit is {limit}")]
    BudgetExceeded { requested: usize, limit: usize },

    #[error("non-finite value at layer {layer}")]
    NonFinite { layer: usize },

    #[error("construction failed verification: {0}")]
    Verification(String),

    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, PwlError>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(PwlError::DimensionMismatch { expected, found })
    }
}
