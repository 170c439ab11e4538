//! Binary sidecar for large pair corpora.
//!
//! Layout: the 8-byte magic `RISEPAIR`, a little-endian `u32` header length,
//! a JSON header, then for every record its neutral and variant embeddings
//! as little-endian `f64`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::prototype::Pair;
use crate::sphere::UnitVector;

pub const MAGIC: &[u8; 8] = b"RISEPAIR";
pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u64,
    dim: usize,
    records: Vec<RecordTags>,
}

#[derive(Serialize, Deserialize)]
struct RecordTags {
    id: String,
    language: String,
    phenomenon: String,
}

pub fn encode_pairs(pairs: &[Pair]) -> Result<Vec<u8>, DataError> {
    let dim = pairs.first().map_or(0, Pair::dim);
    if let Some((index, p)) = pairs.iter().enumerate().find(|(_, p)| p.dim() != dim) {
        return Err(crate::Error::MixedDimensions {
            index,
            expected: dim,
            found: p.dim(),
        }
        .into());
    }
    let header = Header {
        format_version: FORMAT_VERSION,
        dim,
        records: pairs
            .iter()
            .map(|p| RecordTags {
                id: p.id.clone(),
                language: p.language.clone(),
                phenomenon: p.phenomenon.clone(),
            })
            .collect(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + header.len() + pairs.len() * dim * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for p in pairs {
        for x in p.neutral().as_slice().iter().chain(p.variant().as_slice()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_pairs(bytes: &[u8]) -> Result<Vec<Pair>, DataError> {
    let corrupt = |m: &str| DataError::CorruptVector(m.to_string());
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(corrupt("missing RISEPAIR magic"));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = bytes
        .get(12..12 + hlen)
        .ok_or_else(|| corrupt("header extends past end of file"))?;
    let value: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| DataError::CorruptVector(format!("header: {e}")))?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| corrupt("header lacks format_version"))?;
    if found != FORMAT_VERSION {
        return Err(DataError::Version {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let header: Header =
        serde_json::from_value(value).map_err(|e| DataError::CorruptVector(format!("header: {e}")))?;
    let data = &bytes[12 + hlen..];
    let expected = header.records.len() * header.dim * 2 * 8;
    if data.len() != expected {
        return Err(DataError::CorruptVector(format!(
            "expected {expected} bytes of vector data, found {}",
            data.len()
        )));
    }
    let floats: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if floats.iter().any(|x| !x.is_finite()) {
        return Err(corrupt("non-finite value in vector data"));
    }
    let d = header.dim;
    header
        .records
        .into_iter()
        .enumerate()
        .map(|(i, tags)| {
            let chunk = &floats[2 * d * i..2 * d * (i + 1)];
            let neutral = UnitVector::new(&chunk[..d])?;
            let variant = UnitVector::new(&chunk[d..])?;
            Ok(Pair::new(tags.id, tags.language, tags.phenomenon, neutral, variant)?)
        })
        .collect()
}

pub fn save_pairs_binary(path: &Path, pairs: &[Pair]) -> Result<(), DataError> {
    let bytes = encode_pairs(pairs)?;
    std::fs::write(path, bytes).map_err(|e| DataError::io(path, e))
}

pub fn load_pairs_binary(path: &Path) -> Result<Vec<Pair>, DataError> {
    let bytes = std::fs::read(path).map_err(|e| DataError::io(path, e))?;
    decode_pairs(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthSpec};

    #[test]
    fn round_trip_is_bit_exact() {
        let data = generate(&SynthSpec::new(16, 30, 0.4, 0.2, 1)).unwrap();
        let bytes = encode_pairs(&data.pairs).unwrap();
        assert_eq!(decode_pairs(&bytes).unwrap(), data.pairs);
    }

    #[test]
    fn empty_set() {
        let bytes = encode_pairs(&[]).unwrap();
        assert!(decode_pairs(&bytes).unwrap().is_empty());
    }

    #[test]
    fn damage_is_detected() {
        let data = generate(&SynthSpec::new(4, 3, 0.4, 0.2, 1)).unwrap();
        let bytes = encode_pairs(&data.pairs).unwrap();
        assert!(matches!(
            decode_pairs(&bytes[..bytes.len() - 3]),
            Err(DataError::CorruptVector(_))
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_pairs(&bad), Err(DataError::CorruptVector(_))));
        let text = String::from_utf8_lossy(&bytes[12..]).into_owned();
        assert!(text.contains("\"format_version\":1"));
    }
}
