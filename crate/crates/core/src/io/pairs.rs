use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::error::Error;
use crate::prototype::Pair;
use crate::sphere::{normalize, NormDrift, NormPolicy, UnitVector};

/// One line of a pair corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: String,
    pub language: String,
    pub phenomenon: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neutral_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_text: Option<String>,
    pub neutral_embedding: Vec<f64>,
    pub variant_embedding: Vec<f64>,
}

impl From<&Pair> for PairRecord {
    fn from(p: &Pair) -> Self {
        PairRecord {
            id: p.id.clone(),
            language: p.language.clone(),
            phenomenon: p.phenomenon.clone(),
            neutral_text: None,
            variant_text: None,
            neutral_embedding: p.neutral().as_slice().to_vec(),
            variant_embedding: p.variant().as_slice().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticKind {
    /// An embedding's raw norm was more than 1% away from one.
    NormDrift { field: &'static str, raw_norm: f64 },
    /// The record was skipped.
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub id: Option<String>,
    pub kind: DiagnosticKind,
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub pairs: Vec<Pair>,
    pub diagnostics: Vec<Diagnostic>,
}

impl LoadReport {
    pub fn rejected(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| matches!(d.kind, DiagnosticKind::Rejected(_)))
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| matches!(d.kind, DiagnosticKind::NormDrift { .. }))
    }
}

fn embed(raw: &[f64], line: usize, policy: NormPolicy) -> Result<(UnitVector, Option<NormDrift>), DataError> {
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(DataError::Parse {
            line,
            message: "embedding contains a non-finite value".into(),
        });
    }
    normalize(raw, policy).map_err(|e| match e {
        Error::ZeroVector { .. } => DataError::ZeroVector { line },
        other => DataError::Record { line, source: other },
    })
}

/// Parses one record line into a pair, checking it against `dim`.
fn parse_record(
    text: &str,
    line: usize,
    dim: &mut Option<usize>,
    policy: NormPolicy,
) -> Result<(Pair, Vec<Diagnostic>), (Option<String>, DataError)> {
    let rec: PairRecord = serde_json::from_str(text).map_err(|e| {
        (
            None,
            DataError::Parse {
                line,
                message: e.to_string(),
            },
        )
    })?;
    let id = Some(rec.id.clone());
    let fail = |e: DataError| (id.clone(), e);
    if rec.neutral_embedding.is_empty() || rec.variant_embedding.is_empty() {
        return Err(fail(DataError::Parse {
            line,
            message: "embedding arrays must be non-empty".into(),
        }));
    }
    if rec.neutral_embedding.len() != rec.variant_embedding.len() {
        return Err(fail(DataError::Parse {
            line,
            message: format!(
                "neutral embedding has {} entries but variant has {}",
                rec.neutral_embedding.len(),
                rec.variant_embedding.len()
            ),
        }));
    }
    let found = rec.neutral_embedding.len();
    match *dim {
        Some(expected) if expected != found => {
            return Err(fail(DataError::DimensionMismatch {
                line,
                expected,
                found,
            }))
        }
        _ => {}
    }
    let (neutral, d1) = embed(&rec.neutral_embedding, line, policy).map_err(fail)?;
    let (variant, d2) = embed(&rec.variant_embedding, line, policy).map_err(fail)?;
    let pair = Pair::new(rec.id.clone(), rec.language, rec.phenomenon, neutral, variant).map_err(
        |e| match e {
            Error::AntipodalPair { cos } => fail(DataError::AntipodalPair { line, cos }),
            other => fail(DataError::Record { line, source: other }),
        },
    )?;
    dim.get_or_insert(found);
    let diags = [("neutral_embedding", d1), ("variant_embedding", d2)]
        .into_iter()
        .filter_map(|(field, d)| {
            d.map(|d| Diagnostic {
                line,
                id: id.clone(),
                kind: DiagnosticKind::NormDrift {
                    field,
                    raw_norm: d.raw_norm,
                },
            })
        })
        .collect();
    Ok((pair, diags))
}

/// Reads JSON Lines pair records. Blank lines are skipped; line numbers are
/// one-based.
///
/// Under [`NormPolicy::Strict`] the first bad record is an error. Under
/// [`NormPolicy::Warn`] bad records are skipped and reported with their line
/// and id, and embeddings whose norm is off by more than 1% are flagged.
pub fn read_pairs<R: BufRead>(reader: R, policy: NormPolicy) -> Result<LoadReport, DataError> {
    let mut report = LoadReport::default();
    let mut dim = None;
    for (idx, text) in reader.lines().enumerate() {
        let line = idx + 1;
        let text = text.map_err(|e| DataError::Parse {
            line,
            message: e.to_string(),
        })?;
        if text.trim().is_empty() {
            continue;
        }
        match parse_record(&text, line, &mut dim, policy) {
            Ok((pair, diags)) => {
                report.pairs.push(pair);
                report.diagnostics.extend(diags);
            }
            Err((_, e)) if policy == NormPolicy::Strict => return Err(e),
            Err((id, e)) => report.diagnostics.push(Diagnostic {
                line,
                id,
                kind: DiagnosticKind::Rejected(e.to_string()),
            }),
        }
    }
    Ok(report)
}

pub fn load_pairs(path: &Path, policy: NormPolicy) -> Result<LoadReport, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    read_pairs(BufReader::new(file), policy)
}

pub fn write_pairs<W: Write>(mut w: W, pairs: &[Pair]) -> std::io::Result<()> {
    for p in pairs {
        let line = serde_json::to_string(&PairRecord::from(p)).expect("records serialize");
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_pairs(path: &Path, pairs: &[Pair]) -> Result<(), DataError> {
    let file = File::create(path).map_err(|e| DataError::io(path, e))?;
    write_pairs(BufWriter::new(file), pairs).map_err(|e| DataError::io(path, e))
}

/// One anchor embedding for fitting a space map; anchors pair up by line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    pub id: String,
    pub embedding: Vec<f64>,
}

pub fn read_anchors<R: BufRead>(reader: R) -> Result<Vec<(String, UnitVector)>, DataError> {
    let mut out = Vec::new();
    let mut dim = None;
    for (idx, text) in reader.lines().enumerate() {
        let line = idx + 1;
        let text = text.map_err(|e| DataError::Parse {
            line,
            message: e.to_string(),
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: AnchorRecord = serde_json::from_str(&text).map_err(|e| DataError::Parse {
            line,
            message: e.to_string(),
        })?;
        let expected = *dim.get_or_insert(rec.embedding.len());
        if rec.embedding.len() != expected {
            return Err(DataError::DimensionMismatch {
                line,
                expected,
                found: rec.embedding.len(),
            });
        }
        let (u, _) = embed(&rec.embedding, line, NormPolicy::Strict)?;
        out.push((rec.id, u));
    }
    Ok(out)
}

pub fn load_anchors(path: &Path) -> Result<Vec<(String, UnitVector)>, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    read_anchors(BufReader::new(file))
}

pub fn save_anchors(path: &Path, anchors: &[(String, UnitVector)]) -> Result<(), DataError> {
    let file = File::create(path).map_err(|e| DataError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| DataError::io(path, e);
    for (id, u) in anchors {
        let rec = AnchorRecord {
            id: id.clone(),
            embedding: u.as_slice().to_vec(),
        };
        let line = serde_json::to_string(&rec).expect("records serialize");
        w.write_all(line.as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}
