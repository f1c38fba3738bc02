use thiserror::Error;

use crate::chain::ValidationReport;
use crate::lower::EmbeddingViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("chain violates program constraints: {0}")]
    InvalidChain(ValidationReport),

    #[error("construction requires a uniform stationary distribution")]
    NonUniform,

    #[error("function is constant under pi, variance is zero")]
    ConstantFunction,

    #[error("infeasible embedding: {0}")]
    InfeasibleEmbedding(EmbeddingViolation),

    #[error("degenerate embedding: all vectors coincide on every edge")]
    DegenerateEmbedding,

    #[error("{what} has size {size}, limit is {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("bound inversion: {0}")]
    BoundInversion(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
