mod baseline;
mod bench;
mod commute;
mod cross_model;
mod embed;
mod eval_transfer;
mod learn;
mod synth;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rise_core::io::{binary, load_pairs, DiagnosticKind};
use rise_core::{NormPolicy, Pair};

use crate::cli::{Cli, Command};
use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};

/// What every command gets besides its own arguments.
pub struct Context {
    pub file: ConfigFile,
    pub workers: Option<usize>,
    pub manifest: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let workers = cli.workers.or(file.workers);
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size worker pool: {e}")))?;
    }
    let ctx = Context {
        file,
        workers,
        manifest: cli.manifest,
    };
    match cli.command {
        Command::Synth(a) => synth::synth(&ctx, a),
        Command::RandomProto(a) => synth::random_proto(&ctx, a),
        Command::Learn(a) => learn::run(&ctx, a),
        Command::EvalTransfer(a) => eval_transfer::run(&ctx, a),
        Command::Baseline(a) => baseline::run(&ctx, a),
        Command::Commute(a) => commute::run(&ctx, a),
        Command::CrossModel(a) => cross_model::run(&ctx, a),
        Command::Bench(a) => bench::run(&ctx, a),
        Command::Embed(a) => embed::run(&ctx, a),
    }
}

/// Loads a JSONL or binary corpus, detected by magic bytes. Skipped records
/// and norm warnings go to stderr.
pub fn load_corpus(path: &Path, policy: NormPolicy) -> CliResult<Vec<Pair>> {
    let mut head = Vec::with_capacity(8);
    std::fs::File::open(path)
        .and_then(|f| f.take(8).read_to_end(&mut head))
        .map_err(|e| CliError::io(path, e))?;
    if head == binary::MAGIC {
        return Ok(binary::load_pairs_binary(path)?);
    }
    let report = load_pairs(path, policy)?;
    for d in &report.diagnostics {
        let what = match &d.kind {
            DiagnosticKind::NormDrift { field, raw_norm } => {
                format!("warning: {field} norm {raw_norm:.6} renormalized")
            }
            DiagnosticKind::Rejected(why) => format!("skipped: {why}"),
        };
        eprintln!("{}:{}: {what}", path.display(), d.line);
    }
    Ok(report.pairs)
}

pub fn is_binary_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// Keeps pairs tagged `phenomenon`, or all pairs when it is `None`.
pub fn select(pairs: Vec<Pair>, phenomenon: Option<&str>) -> Vec<Pair> {
    match phenomenon {
        Some(tag) => pairs.into_iter().filter(|p| p.phenomenon == tag).collect(),
        None => pairs,
    }
}

/// Writes `text` to `path`, or to stdout.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

pub fn to_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use rise_core::io::save_pairs;
    use rise_core::synth::{generate, SynthSpec};

    #[test]
    fn corpus_format_is_sniffed() {
        let dir = tempfile::tempdir().unwrap();
        let pairs = generate(&SynthSpec::new(4, 3, 0.2, 0.0, 1)).unwrap().pairs;
        let (j, b) = (dir.path().join("a.jsonl"), dir.path().join("a.bin"));
        save_pairs(&j, &pairs).unwrap();
        binary::save_pairs_binary(&b, &pairs).unwrap();
        assert_eq!(load_corpus(&j, NormPolicy::Strict).unwrap(), pairs);
        assert_eq!(load_corpus(&b, NormPolicy::Strict).unwrap(), pairs);
    }

    #[test]
    fn short_files_are_read_as_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("e.jsonl");
        std::fs::write(&empty, "").unwrap();
        assert!(load_corpus(&empty, NormPolicy::Strict).unwrap().is_empty());
    }
}
