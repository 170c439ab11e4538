use thiserror::Error;

use crate::rotor::RotorBackend;

/// Errors raised by the geometric and learning primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector has (near) zero length: norm = {norm:e}")]
    ZeroVector { norm: f64 },

    #[error("dimension {dim} is too small, at least 2 is required")]
    DimensionTooSmall { dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("points are antipodal (cosine = {cos}); the logarithmic map is undefined")]
    AntipodalPair { cos: f64 },

    #[error("vector is not unit length: norm = {norm}")]
    NotUnit { norm: f64 },

    #[error("vector is not tangent to its base point: <vec, base> = {residual:e}")]
    NotTangent { residual: f64 },

    #[error("cannot learn a prototype from an empty pair set")]
    EmptyPairSet,

    #[error("pair {index} has dimension {found}, expected {expected}")]
    MixedDimensions {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("pair {index} has phenomenon {found:?}, expected {expected:?}")]
    MixedPhenomena {
        index: usize,
        expected: String,
        found: String,
    },

    #[error("rotor backend mismatch: prototype uses {expected}, requested {found}")]
    BackendMismatch {
        expected: RotorBackend,
        found: RotorBackend,
    },

    #[error("cannot score an empty set")]
    EmptySet,

    #[error("split of {n} pairs at train fraction {fraction} leaves an empty side")]
    DegenerateSplit { n: usize, fraction: f64 },

    #[error("least-squares system is rank deficient: rank {rank} < {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
