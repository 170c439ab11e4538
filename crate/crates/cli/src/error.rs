use std::path::PathBuf;

use rise_core::io::{DataError, ProviderError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rise_core::Error),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },
}

pub type CliResult<T> = Result<T, CliError>;

/// Process exit codes. Stable across releases; see the README table.
pub mod code {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const FORMAT: i32 = 4;
    pub const EMPTY_PAIR_SET: i32 = 5;
    pub const DEGENERATE_SPLIT: i32 = 6;
    pub const DIMENSION: i32 = 7;
    pub const ANTIPODAL: i32 = 8;
    pub const ZERO_VECTOR: i32 = 9;
    pub const RANK_DEFICIENT: i32 = 10;
    pub const BACKEND_MISMATCH: i32 = 11;
    pub const INVALID_ARGUMENT: i32 = 12;
    pub const PROVIDER: i32 = 13;
}

fn core_code(e: &rise_core::Error) -> i32 {
    use rise_core::Error::*;
    match e {
        ZeroVector { .. } => code::ZERO_VECTOR,
        DimensionMismatch { .. } | MixedDimensions { .. } => code::DIMENSION,
        AntipodalPair { .. } => code::ANTIPODAL,
        EmptyPairSet | EmptySet => code::EMPTY_PAIR_SET,
        DegenerateSplit { .. } => code::DEGENERATE_SPLIT,
        RankDeficient { .. } => code::RANK_DEFICIENT,
        BackendMismatch { .. } => code::BACKEND_MISMATCH,
        DimensionTooSmall { .. } | NotUnit { .. } | NotTangent { .. } | MixedPhenomena { .. } | InvalidArgument(_) => {
            code::INVALID_ARGUMENT
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_code(e),
            CliError::Data(e) => match e {
                DataError::Io { .. } => code::IO,
                DataError::Parse { .. } | DataError::Version { .. } | DataError::CorruptVector(_) => code::FORMAT,
                DataError::DimensionMismatch { .. } => code::DIMENSION,
                DataError::AntipodalPair { .. } => code::ANTIPODAL,
                DataError::ZeroVector { .. } => code::ZERO_VECTOR,
                DataError::Record { source, .. } | DataError::Invalid(source) => core_code(source),
            },
            CliError::Provider(ProviderError::Cache(DataError::Io { .. })) => code::IO,
            CliError::Provider(_) => code::PROVIDER,
            CliError::Io { .. } => code::IO,
            CliError::Usage(_) => code::USAGE,
            CliError::Config { .. } => code::USAGE,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
