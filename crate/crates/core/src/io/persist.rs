//! Versioned JSON documents for prototypes and space maps.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::DataError;
use crate::cross_model::SpaceMap;
use crate::prototype::{Prototype, PrototypeMeta};
use crate::rotor::RotorBackend;

pub const PROTOTYPE_FORMAT_VERSION: u64 = 1;
pub const SPACE_MAP_FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct PrototypeDoc {
    format_version: u64,
    dim: usize,
    backend: RotorBackend,
    pair_count: usize,
    #[serde(flatten)]
    meta: PrototypeMeta,
    vec: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpaceMapDoc {
    format_version: u64,
    #[serde(flatten)]
    map: SpaceMap,
}

/// Parses `text` and checks its `format_version` before looking at anything
/// else, so a newer file reports a version error rather than a schema one.
fn versioned(text: &str, expected: u64) -> Result<Value, DataError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| DataError::CorruptVector(format!("unreadable document: {e}")))?;
    let found = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| DataError::CorruptVector("missing format_version".into()))?;
    if found != expected {
        return Err(DataError::Version { found, expected });
    }
    Ok(value)
}

fn check_finite(xs: &[f64], what: &str) -> Result<(), DataError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(DataError::CorruptVector(format!("{what} contains a non-finite value")))
    }
}

pub fn prototype_to_json(p: &Prototype) -> String {
    let doc = PrototypeDoc {
        format_version: PROTOTYPE_FORMAT_VERSION,
        dim: p.dim(),
        backend: p.backend(),
        pair_count: p.pair_count(),
        meta: p.meta.clone(),
        vec: p.as_slice().to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("prototype serializes");
    s.push('\n');
    s
}

pub fn prototype_from_json(text: &str) -> Result<Prototype, DataError> {
    let value = versioned(text, PROTOTYPE_FORMAT_VERSION)?;
    let doc: PrototypeDoc = serde_json::from_value(value)
        .map_err(|e| DataError::CorruptVector(format!("prototype document: {e}")))?;
    if doc.vec.len() != doc.dim {
        return Err(DataError::CorruptVector(format!(
            "prototype header says dimension {} but vector has {} entries",
            doc.dim,
            doc.vec.len()
        )));
    }
    check_finite(&doc.vec, "prototype vector")?;
    Ok(Prototype::new(doc.vec, doc.pair_count, doc.backend, doc.meta)?)
}

pub fn save_prototype(path: &Path, p: &Prototype) -> Result<(), DataError> {
    std::fs::write(path, prototype_to_json(p)).map_err(|e| DataError::io(path, e))
}

pub fn load_prototype(path: &Path) -> Result<Prototype, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    prototype_from_json(&text)
}

pub fn space_map_to_json(m: &SpaceMap) -> String {
    let doc = SpaceMapDoc {
        format_version: SPACE_MAP_FORMAT_VERSION,
        map: m.clone(),
    };
    let mut s = serde_json::to_string(&doc).expect("space map serializes");
    s.push('\n');
    s
}

pub fn space_map_from_json(text: &str) -> Result<SpaceMap, DataError> {
    let value = versioned(text, SPACE_MAP_FORMAT_VERSION)?;
    let doc: SpaceMapDoc = serde_json::from_value(value)
        .map_err(|e| DataError::CorruptVector(format!("space map document: {e}")))?;
    let m = doc.map;
    if m.matrix.len() != m.d_src * m.d_tgt {
        return Err(DataError::CorruptVector(format!(
            "space map header says {}x{} but matrix has {} entries",
            m.d_tgt,
            m.d_src,
            m.matrix.len()
        )));
    }
    check_finite(&m.matrix, "space map")?;
    Ok(m)
}

pub fn save_space_map(path: &Path, m: &SpaceMap) -> Result<(), DataError> {
    std::fs::write(path, space_map_to_json(m)).map_err(|e| DataError::io(path, e))
}

pub fn load_space_map(path: &Path) -> Result<SpaceMap, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    space_map_from_json(&text)
}
