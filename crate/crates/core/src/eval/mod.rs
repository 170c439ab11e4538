//! Scoring and experiment harness.
//!
//! The rotor alignment score of a prototype on a set of held-out pairs is
//! the mean cosine similarity between the predicted variant and the actual
//! variant. Transfer matrices learn one prototype per training language and
//! score it on every language's held-out split.

mod baseline;
mod complexity;
mod render;

pub use baseline::{random_baseline, random_baseline_with, BaselineReport, RandomBaseline};
pub use complexity::{complexity_probe, loglog_slope, ComplexityPoint, ComplexityReport};
pub use render::{baselines_csv, heatmap_svg};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prototype::{learn_prototype, predict, Pair, Prototype};
use crate::rotor::RotorBackend;
use crate::sphere::UnitVector;
use crate::vecops::cosine;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub mean_score: f64,
    pub std: f64,
    pub n_test: usize,
    pub phenomenon: String,
    pub train_lang: String,
    pub test_lang: String,
    pub model_id: String,
}

impl ScoreReport {
    fn from_scores(scores: &[f64]) -> Result<Self> {
        let (mean, std) = mean_std(scores).ok_or(Error::EmptySet)?;
        Ok(Self {
            mean_score: mean.clamp(-1.0, 1.0),
            std,
            n_test: scores.len(),
            phenomenon: String::new(),
            train_lang: String::new(),
            test_lang: String::new(),
            model_id: String::new(),
        })
    }

    fn tagged(mut self, phenomenon: &str, train: &str, test: &str, model_id: &str) -> Self {
        self.phenomenon = phenomenon.into();
        self.train_lang = train.into();
        self.test_lang = test.into();
        self.model_id = model_id.into();
        self
    }
}

/// Sequential mean and sample standard deviation (0 for a single value).
pub(crate) fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}

/// Mean and std of the cosine between each predicted and target embedding.
pub fn rotor_alignment_score(items: &[(UnitVector, UnitVector)]) -> Result<ScoreReport> {
    if let Some((first, _)) = items.first() {
        for (p, t) in items {
            for v in [p, t] {
                if v.dim() != first.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: first.dim(),
                        found: v.dim(),
                    });
                }
            }
        }
    }
    let scores: Vec<f64> = items
        .iter()
        .map(|(p, t)| cosine(p.as_slice(), t.as_slice()))
        .collect();
    ScoreReport::from_scores(&scores)
}

/// Per-pair cosine between `predict(neutral, proto)` and `variant`.
pub fn alignment_scores(proto: &Prototype, pairs: &[Pair], backend: RotorBackend) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|p| {
            let pred = predict(p.neutral(), proto, backend)?;
            Ok(cosine(pred.as_slice(), p.variant().as_slice()))
        })
        .collect()
}

/// Scores a prototype on held-out pairs. Pairs are predicted in parallel;
/// the reduction is in input order.
pub fn score_prototype(proto: &Prototype, pairs: &[Pair], backend: RotorBackend) -> Result<ScoreReport> {
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|p| {
            let pred = predict(p.neutral(), proto, backend)?;
            Ok(cosine(pred.as_slice(), p.variant().as_slice()))
        })
        .collect::<Result<_>>()?;
    ScoreReport::from_scores(&scores)
}

/// Deterministic shuffle-split. Both sides keep the input order.
pub fn split<T: Clone>(items: &[T], train_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    let n = items.len();
    let degenerate = Error::DegenerateSplit {
        n,
        fraction: train_fraction,
    };
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(degenerate);
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(degenerate);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_idx, test_idx) = idx.split_at_mut(n_train);
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((
        train_idx.iter().map(|&i| items[i].clone()).collect(),
        test_idx.iter().map(|&i| items[i].clone()).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferConfig {
    pub phenomenon: String,
    pub model_id: String,
    pub backend: RotorBackend,
    pub train_fraction: f64,
    pub seed: u64,
}

impl TransferConfig {
    pub fn new(phenomenon: &str) -> Self {
        Self {
            phenomenon: phenomenon.into(),
            model_id: String::new(),
            backend: RotorBackend::Householder,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// One language's split and the prototype learned on its training side.
#[derive(Debug, Clone)]
pub struct LanguageSplit {
    pub language: String,
    pub train: Vec<Pair>,
    pub test: Vec<Pair>,
    pub prototype: Prototype,
}

/// Splits every language with the same seed and learns its prototype.
/// Pairs tagged with another phenomenon are ignored.
pub fn prepare_languages(datasets: &[(String, Vec<Pair>)], cfg: &TransferConfig) -> Result<Vec<LanguageSplit>> {
    if datasets.is_empty() {
        return Err(Error::InvalidArgument("at least one language is required".into()));
    }
    let dim = datasets
        .iter()
        .flat_map(|(_, p)| p.first())
        .map(Pair::dim)
        .next();
    datasets
        .iter()
        .map(|(language, pairs)| {
            let pairs: Vec<Pair> = pairs
                .iter()
                .filter(|p| p.phenomenon == cfg.phenomenon)
                .cloned()
                .collect();
            if pairs.is_empty() {
                return Err(Error::EmptyPairSet);
            }
            if let Some(found) = pairs.iter().map(Pair::dim).find(|&d| Some(d) != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim.unwrap_or(found),
                    found,
                });
            }
            let (train, test) = split(&pairs, cfg.train_fraction, cfg.seed)?;
            let mut prototype = learn_prototype(&train, cfg.backend)?;
            prototype.meta.language = language.clone();
            prototype.meta.model_id = cfg.model_id.clone();
            Ok(LanguageSplit {
                language: language.clone(),
                train,
                test,
                prototype,
            })
        })
        .collect()
}

/// Scores grid: row = training (or source) language, column = test language.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferMatrix {
    pub train_languages: Vec<String>,
    pub test_languages: Vec<String>,
    pub cells: Vec<Vec<ScoreReport>>,
    pub phenomenon: String,
    pub model_id: String,
}

impl TransferMatrix {
    pub fn cell(&self, train: usize, test: usize) -> &ScoreReport {
        &self.cells[train][test]
    }

    /// Unweighted mean of the cell means.
    pub fn mean_score(&self) -> f64 {
        let all: Vec<f64> = self.cells.iter().flatten().map(|c| c.mean_score).collect();
        all.iter().sum::<f64>() / all.len() as f64
    }

    /// `train_lang,test_lang,mean,std,n`, one row per cell in row-major order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("train_lang,test_lang,mean,std,n\n");
        for row in &self.cells {
            for c in row {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    csv_field(&c.train_lang),
                    csv_field(&c.test_lang),
                    c.mean_score,
                    c.std,
                    c.n_test
                ));
            }
        }
        out
    }

    pub fn to_svg(&self) -> String {
        heatmap_svg(self)
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Scores each row's prototype against each column's held-out pairs.
pub fn score_grid(
    rows: &[(String, Prototype)],
    cols: &[(String, Vec<Pair>)],
    phenomenon: &str,
    model_id: &str,
    backend: RotorBackend,
) -> Result<TransferMatrix> {
    let jobs: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|i| (0..cols.len()).map(move |j| (i, j)))
        .collect();
    let flat: Vec<ScoreReport> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (train_lang, proto) = &rows[i];
            let (test_lang, pairs) = &cols[j];
            let scores = alignment_scores(proto, pairs, backend)?;
            Ok(ScoreReport::from_scores(&scores)?.tagged(phenomenon, train_lang, test_lang, model_id))
        })
        .collect::<Result<_>>()?;
    let cells = flat.chunks(cols.len().max(1)).map(<[_]>::to_vec).collect();
    Ok(TransferMatrix {
        train_languages: rows.iter().map(|(l, _)| l.clone()).collect(),
        test_languages: cols.iter().map(|(l, _)| l.clone()).collect(),
        cells,
        phenomenon: phenomenon.into(),
        model_id: model_id.into(),
    })
}

/// Cross-language transfer: learn on each language's train split, score on
/// every language's test split. The diagonal is the monolingual score.
pub fn transfer_matrix(datasets: &[(String, Vec<Pair>)], cfg: &TransferConfig) -> Result<TransferMatrix> {
    let langs = prepare_languages(datasets, cfg)?;
    let rows: Vec<(String, Prototype)> = langs
        .iter()
        .map(|l| (l.language.clone(), l.prototype.clone()))
        .collect();
    let cols: Vec<(String, Vec<Pair>)> = langs
        .into_iter()
        .map(|l| (l.language, l.test))
        .collect();
    score_grid(&rows, &cols, &cfg.phenomenon, &cfg.model_id, cfg.backend)
}
