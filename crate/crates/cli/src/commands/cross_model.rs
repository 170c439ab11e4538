use std::collections::HashMap;

use rise_core::cross_model::{fit_map, port_prototype, PortMode};
use rise_core::eval::{score_prototype, split};
use rise_core::io::{load_anchors, load_prototype, save_prototype, save_space_map};
use rise_core::{learn_prototype, UnitVector};
use serde::Serialize;

use super::{emit, load_corpus, select, to_json, Context};
use crate::cli::CrossModelArgs;
use crate::config::Settings;
use crate::error::CliResult;
use crate::manifest::Recorder;

#[derive(Serialize)]
struct Report {
    phenomenon: String,
    mode: PortMode,
    n_anchors: usize,
    pca_rank: Option<usize>,
    ridge: f64,
    source_magnitude: f64,
    mapped_magnitude: f64,
    n_test: usize,
    ported_score: f64,
    native_score: f64,
    /// `ported_score / native_score`; absent when the native score is not positive.
    ported_over_native: Option<f64>,
}

/// Anchors present in both files, in source order.
fn matched_anchors(src: Vec<(String, UnitVector)>, tgt: Vec<(String, UnitVector)>) -> (Vec<UnitVector>, Vec<UnitVector>) {
    let total = src.len().max(tgt.len());
    let mut by_id: HashMap<String, UnitVector> = tgt.into_iter().collect();
    let (xs, ys): (Vec<_>, Vec<_>) = src
        .into_iter()
        .filter_map(|(id, x)| by_id.remove(&id).map(|y| (x, y)))
        .unzip();
    if xs.len() < total {
        eprintln!("{} anchors matched by id, {} unmatched ignored", xs.len(), total - xs.len());
    }
    (xs, ys)
}

pub fn run(ctx: &Context, args: CrossModelArgs) -> CliResult<()> {
    let proto = load_prototype(&args.proto)?;
    let mut settings = Settings::resolve(&ctx.file, &args.common, ctx.workers).with_split(args.split);
    settings.backend = args.common.backend.unwrap_or(proto.backend());
    let mut rec = Recorder::new(
        "cross-model",
        serde_json::json!({
            "settings": settings,
            "pca_rank": args.pca_rank,
            "ridge": args.ridge,
            "mode": args.mode,
        }),
        Some(settings.seed),
    );
    for input in [&args.anchors_src, &args.anchors_tgt, &args.proto, &args.tgt_pairs] {
        rec.input(input)?;
    }

    let (xs, ys) = matched_anchors(load_anchors(&args.anchors_src)?, load_anchors(&args.anchors_tgt)?);
    let source_model = args.source_model.clone().unwrap_or_else(|| proto.meta.model_id.clone());
    let target_model = args.target_model.clone().unwrap_or_else(|| settings.model_id.clone());
    let map = fit_map(&xs, &ys, args.pca_rank, args.ridge)?.with_models(&source_model, &target_model);
    let ported = port_prototype(&proto, &map, args.mode)?;

    let tag = (!proto.meta.phenomenon.is_empty()).then_some(proto.meta.phenomenon.as_str());
    let pairs = select(load_corpus(&args.tgt_pairs, settings.norm_policy)?, tag);
    let (train, test) = split(&pairs, settings.split, settings.seed)?;
    let native = learn_prototype(&train, settings.backend)?;
    let ported_score = score_prototype(&ported, &test, settings.backend)?;
    let native_score = score_prototype(&native, &test, settings.backend)?;
    let report = Report {
        phenomenon: proto.meta.phenomenon.clone(),
        mode: args.mode,
        n_anchors: map.n_anchors,
        pca_rank: map.pca_rank,
        ridge: map.ridge,
        source_magnitude: proto.magnitude(),
        mapped_magnitude: ported.magnitude(),
        n_test: test.len(),
        ported_score: ported_score.mean_score,
        native_score: native_score.mean_score,
        ported_over_native: (native_score.mean_score > 0.0).then(|| ported_score.mean_score / native_score.mean_score),
    };
    eprintln!(
        "ported {:.6} vs native {:.6} on {} held-out pairs",
        report.ported_score, report.native_score, report.n_test
    );

    emit(args.out.as_deref(), &to_json(&report))?;
    if let Some(path) = &args.out {
        rec.output(path)?;
    }
    if let Some(path) = &args.map_out {
        save_space_map(path, &map)?;
        rec.output(path)?;
    }
    if let Some(path) = &args.proto_out {
        save_prototype(path, &ported)?;
        rec.output(path)?;
    }
    rec.finish(ctx.manifest.as_deref())
}
