use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{sha256_hex, DataError};

/// Content-addressed, append-only store of provider embeddings.
///
/// Entries live at `<root>/<model>/<hh>/<sha256(text)>.json`. An entry is
/// written to a temporary file and renamed into place, and never rewritten.
#[derive(Debug, Clone)]
pub struct EmbeddingCache {
    root: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    model_id: String,
    text_sha256: String,
    embedding: Vec<f64>,
}

fn model_dir(model_id: &str) -> String {
    model_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

impl EmbeddingCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry_path(&self, model_id: &str, text: &str) -> PathBuf {
        let h = sha256_hex(text.as_bytes());
        self.root
            .join(model_dir(model_id))
            .join(&h[..2])
            .join(format!("{h}.json"))
    }

    pub fn get(&self, model_id: &str, text: &str) -> Result<Option<Vec<f64>>, DataError> {
        let path = self.entry_path(model_id, text);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(DataError::io(&path, e)),
        };
        let entry: Entry = serde_json::from_slice(&bytes).map_err(|e| {
            DataError::CorruptVector(format!("cache entry {}: {e}", path.display()))
        })?;
        if entry.model_id != model_id || entry.text_sha256 != sha256_hex(text.as_bytes()) {
            return Err(DataError::CorruptVector(format!(
                "cache entry {} belongs to another key",
                path.display()
            )));
        }
        Ok(Some(entry.embedding))
    }

    /// Stores an embedding unless one is already present.
    pub fn put(&self, model_id: &str, text: &str, embedding: &[f64]) -> Result<(), DataError> {
        let path = self.entry_path(model_id, text);
        if path.exists() {
            return Ok(());
        }
        let dir = path.parent().expect("entry has a parent");
        std::fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e))?;
        let entry = Entry {
            model_id: model_id.into(),
            text_sha256: sha256_hex(text.as_bytes()),
            embedding: embedding.to_vec(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| DataError::io(dir, e))?;
        serde_json::to_writer(&mut tmp, &entry)
            .map_err(|e| DataError::io(&path, std::io::Error::other(e)))?;
        tmp.persist_noclobber(&path).map(|_| ()).or_else(|e| {
            if path.exists() {
                Ok(())
            } else {
                Err(DataError::io(&path, e.error))
            }
        })
    }
}
