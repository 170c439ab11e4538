//! On-disk formats and the embedding provider client.
//!
//! * Pair corpora: JSON Lines, one [`PairRecord`] per line, or a binary
//!   sidecar (see [`binary`]).
//! * Prototypes and space maps: versioned JSON documents.
//! * Provider responses: a content-addressed cache directory.
//!
//! Floats are written in shortest round-trip decimal form and parsed
//! exactly, so every save/load round trip is bit-exact.

pub mod binary;
mod cache;
mod pairs;
mod persist;
pub mod provider;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::EmbeddingCache;
pub use pairs::{
    load_anchors, load_pairs, read_anchors, read_pairs, save_anchors, save_pairs, write_pairs,
    AnchorRecord, Diagnostic, DiagnosticKind, LoadReport, PairRecord,
};
pub use persist::{
    load_prototype, load_space_map, prototype_from_json, prototype_to_json, save_prototype,
    save_space_map, space_map_from_json, space_map_to_json, PROTOTYPE_FORMAT_VERSION,
    SPACE_MAP_FORMAT_VERSION,
};
pub use provider::{
    fetch_embeddings, HttpResponse, ProviderClient, ProviderConfig, ProviderError, RetryPolicy,
    Transport, TransportError, UreqTransport, WireFormat,
};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: embedding dimension {found} differs from {expected} (first record)")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: neutral and variant embeddings are antipodal (cosine {cos})")]
    AntipodalPair { line: usize, cos: f64 },

    #[error("line {line}: zero-length embedding")]
    ZeroVector { line: usize },

    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: crate::Error,
    },

    #[error("unsupported format version {found}; this build reads version {expected}")]
    Version { found: u64, expected: u64 },

    #[error("corrupt vector data: {0}")]
    CorruptVector(String),

    #[error(transparent)]
    Invalid(#[from] crate::Error),
}

impl DataError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String, DataError> {
    let bytes = std::fs::read(path).map_err(|e| DataError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}
