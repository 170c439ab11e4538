use rayon::prelude::*;
use serde::Serialize;

use super::{alignment_scores, mean_std};
use crate::error::{Error, Result};
use crate::prototype::{Pair, Prototype};
use crate::rotor::RotorBackend;
use crate::synth::{random_prototype_with, substream};

/// Alignment scores of magnitude-matched random prototypes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomBaseline {
    pub random_mean: f64,
    /// Sample standard deviation over trials divided by `sqrt(trials)`.
    pub random_sem: f64,
    pub trials: usize,
    pub magnitude: f64,
}

/// Runs `trials` random prototypes of norm `magnitude` over `test_pairs`.
///
/// Trial `t` draws its prototype from ChaCha8 substream `t` of `seed`, so
/// results do not depend on thread count.
pub fn random_baseline(
    test_pairs: &[Pair],
    magnitude: f64,
    trials: usize,
    backend: RotorBackend,
    seed: u64,
) -> Result<RandomBaseline> {
    let dim = test_pairs.first().ok_or(Error::EmptySet)?.dim();
    let mut report = random_baseline_with(test_pairs, trials, backend, |t| {
        random_prototype_with(dim, magnitude, backend, &mut substream(seed, t as u64))
    })?;
    report.magnitude = magnitude;
    Ok(report)
}

/// Like [`random_baseline`] with a caller-supplied prototype per trial.
pub fn random_baseline_with<F>(
    test_pairs: &[Pair],
    trials: usize,
    backend: RotorBackend,
    draw: F,
) -> Result<RandomBaseline>
where
    F: Fn(usize) -> Result<Prototype> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if test_pairs.is_empty() {
        return Err(Error::EmptySet);
    }
    let per_trial: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let proto = draw(t)?;
            let scores = alignment_scores(&proto, test_pairs, backend)?;
            let (mean, _) = mean_std(&scores).expect("non-empty");
            Ok((mean, proto.magnitude()))
        })
        .collect::<Result<_>>()?;
    let means: Vec<f64> = per_trial.iter().map(|(m, _)| *m).collect();
    let (random_mean, std) = mean_std(&means).expect("trials >= 1");
    Ok(RandomBaseline {
        random_mean,
        random_sem: std / (trials as f64).sqrt(),
        trials,
        magnitude: per_trial[0].1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineReport {
    pub phenomenon: String,
    pub rise_score: f64,
    pub random_mean: f64,
    pub random_sem: f64,
    pub trials: usize,
    /// `rise_score / random_mean`; absent when the random mean is not positive.
    pub advantage_ratio: Option<f64>,
}

impl BaselineReport {
    pub fn new(phenomenon: &str, rise_score: f64, baseline: &RandomBaseline) -> Self {
        let advantage_ratio =
            (baseline.random_mean > 0.0).then(|| rise_score / baseline.random_mean);
        Self {
            phenomenon: phenomenon.into(),
            rise_score,
            random_mean: baseline.random_mean,
            random_sem: baseline.random_sem,
            trials: baseline.trials,
            advantage_ratio,
        }
    }
}
