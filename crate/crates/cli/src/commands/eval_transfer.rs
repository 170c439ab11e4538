use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rise_core::eval::{transfer_matrix, TransferConfig};
use rise_core::Pair;

use super::{emit, load_corpus, Context};
use crate::cli::EvalTransferArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::manifest::Recorder;

/// Corpus files of `dir` in name order.
fn corpus_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| CliError::io(dir, e)))
        .collect::<CliResult<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "jsonl" || e == "bin"))
        .collect();
    files.sort();
    Ok(files)
}

/// The requested phenomenon, or the only one present.
pub fn resolve_phenomenon(requested: Option<&str>, pairs: &[Pair]) -> CliResult<String> {
    if let Some(tag) = requested {
        return Ok(tag.to_string());
    }
    let mut tags: Vec<&str> = pairs.iter().map(|p| p.phenomenon.as_str()).collect();
    tags.sort_unstable();
    tags.dedup();
    match tags.as_slice() {
        [] => Err(rise_core::Error::EmptyPairSet.into()),
        [one] => Ok(one.to_string()),
        many => Err(CliError::Usage(format!(
            "corpus mixes phenomena {many:?}; pick one with --phenomenon"
        ))),
    }
}

pub fn run(ctx: &Context, args: EvalTransferArgs) -> CliResult<()> {
    let settings = Settings::resolve(&ctx.file, &args.common, ctx.workers)
        .with_split(args.split)
        .with_phenomenon(args.phenomenon.as_ref())
        .with_model_id(args.model_id.as_ref());
    let mut rec = Recorder::new("eval-transfer", &settings, Some(settings.seed));

    let mut all = Vec::new();
    for file in corpus_files(&args.datasets)? {
        rec.input(&file)?;
        all.extend(load_corpus(&file, settings.norm_policy)?);
    }
    let phenomenon = resolve_phenomenon(settings.phenomenon.as_deref(), &all)?;
    let mut by_lang: BTreeMap<String, Vec<Pair>> = BTreeMap::new();
    for p in all {
        by_lang.entry(p.language.clone()).or_default().push(p);
    }
    let datasets: Vec<(String, Vec<Pair>)> = by_lang.into_iter().collect();

    let cfg = TransferConfig {
        phenomenon,
        model_id: settings.model_id.clone(),
        backend: settings.backend,
        train_fraction: settings.split,
        seed: settings.seed,
    };
    let matrix = transfer_matrix(&datasets, &cfg)?;
    eprintln!(
        "{} languages, mean transfer score {:.6}",
        matrix.train_languages.len(),
        matrix.mean_score()
    );

    emit(args.csv.as_deref(), &matrix.to_csv())?;
    if let Some(path) = &args.csv {
        rec.output(path)?;
    }
    if let Some(path) = &args.heatmap {
        emit(Some(path), &matrix.to_svg())?;
        rec.output(path)?;
    }
    rec.finish(ctx.manifest.as_deref())
}
