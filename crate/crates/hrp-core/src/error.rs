use thiserror::Error;

/// Errors shared across the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),

    /// Rejection sampling for UE placement hit the attempt cap.
    #[error("packing infeasible: {attempts} rejection attempts exhausted placing UE {placed}")]
    PackingInfeasible { placed: usize, attempts: usize },

    #[error("model validity: {0}")]
    ModelValidity(String),

    #[error("below horizon: elevation {0} rad")]
    BelowHorizon(f64),

    /// Allocation problem fails a necessary feasibility condition before any
    /// solver is invoked.
    #[error("allocation infeasible: {0}")]
    Infeasible(String),

    /// The GP solver certified infeasibility of the transformed program.
    #[error("solver infeasible: most violated constraint {constraint}")]
    SolverInfeasible { constraint: usize },

    #[error("solver iteration cap reached after {iterations} iterations")]
    SolverMaxIter { iterations: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
