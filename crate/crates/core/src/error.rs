use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid convex body: {0}")]
    InvalidBody(String),

    #[error("origin is not an interior point of the body")]
    OriginNotInterior,

    #[error("zero vector has no radial value")]
    ZeroVector,

    #[error("negative argument {0} to a Young function")]
    NegativeArgument(f64),

    #[error("invalid Young function: {0}")]
    InvalidYoung(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid margin overflow: {0}")]
    MarginOverflow(String),

    #[error("unresolvable: {0}")]
    Unresolvable(String),

    #[error("empty set")]
    EmptySet,

    #[error("voxel budget exceeded: {needed} voxels > {budget}")]
    VoxelBudget { needed: usize, budget: usize },

    #[error("set images are not nested at level {level}")]
    NotNested { level: f64 },

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
