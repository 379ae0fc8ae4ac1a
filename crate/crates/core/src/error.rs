//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by genome handling, field transforms, operators, and the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid genome: {0}")]
    InvalidGenome(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("incompatible parents: {0}")]
    IncompatibleParents(String),

    #[error("smoothing needs at least 3 phase genes, got {0}")]
    InsufficientGenes(usize),

    #[error("population too small: need at least {need}, got {got}")]
    InsufficientPopulation { need: usize, got: usize },

    #[error("empty population")]
    EmptyPopulation,

    #[error("invalid goal: {0}")]
    InvalidGoal(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("fitness evaluation failed: {0}")]
    Evaluation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
