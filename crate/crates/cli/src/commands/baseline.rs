use rise_core::eval::{baselines_csv, random_baseline, score_prototype, BaselineReport};
use rise_core::io::load_prototype;
use serde::Serialize;

use super::{emit, load_corpus, select, to_json, Context};
use crate::cli::BaselineArgs;
use crate::config::Settings;
use crate::error::CliResult;
use crate::manifest::Recorder;

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    report: BaselineReport,
    rise_std: f64,
    n_test: usize,
    magnitude: f64,
    backend: rise_core::RotorBackend,
}

pub fn run(ctx: &Context, args: BaselineArgs) -> CliResult<()> {
    let proto = load_prototype(&args.proto)?;
    let mut settings = Settings::resolve(&ctx.file, &args.common, ctx.workers).with_trials(args.trials);
    settings.backend = args.common.backend.unwrap_or(proto.backend());
    let mut rec = Recorder::new("baseline", &settings, Some(settings.seed));
    rec.input(&args.pairs)?;
    rec.input(&args.proto)?;

    let tag = (!proto.meta.phenomenon.is_empty()).then_some(proto.meta.phenomenon.as_str());
    let pairs = select(load_corpus(&args.pairs, settings.norm_policy)?, tag);
    let rise = score_prototype(&proto, &pairs, settings.backend)?;
    let random = random_baseline(&pairs, proto.magnitude(), settings.trials, settings.backend, settings.seed)?;
    let report = Report {
        report: BaselineReport::new(&proto.meta.phenomenon, rise.mean_score, &random),
        rise_std: rise.std,
        n_test: rise.n_test,
        magnitude: random.magnitude,
        backend: settings.backend,
    };
    match report.report.advantage_ratio {
        Some(r) => eprintln!("advantage ratio {r:.4} over {} trials", random.trials),
        None => eprintln!("random mean {:.4} is not positive; no ratio", random.random_mean),
    }

    emit(args.out.as_deref(), &to_json(&report))?;
    if let Some(path) = &args.out {
        rec.output(path)?;
    }
    if let Some(path) = &args.csv {
        emit(Some(path), &baselines_csv(std::slice::from_ref(&report.report)))?;
        rec.output(path)?;
    }
    rec.finish(ctx.manifest.as_deref())
}
