use rise_core::io::{binary, save_pairs, save_prototype};
use rise_core::synth::{generate, random_prototype, SynthSpec};

use super::{is_binary_path, Context};
use crate::cli::{RandomProtoArgs, SynthArgs};
use crate::config::Settings;
use crate::error::CliResult;
use crate::manifest::Recorder;

pub fn synth(ctx: &Context, args: SynthArgs) -> CliResult<()> {
    let settings = Settings::resolve(&ctx.file, &args.common, ctx.workers).with_phenomenon(args.phenomenon.as_ref());
    let phenomenon = settings.phenomenon_or_default();
    let spec = SynthSpec::new(args.dim, args.pairs, args.magnitude, args.sigma, settings.seed)
        .with_tags(&args.language, &phenomenon)
        .with_backend(settings.backend);
    let data = generate(&spec)?;

    let mut rec = Recorder::new("synth", serde_json::json!({ "settings": settings, "spec": spec }), Some(settings.seed));
    if is_binary_path(&args.out) {
        binary::save_pairs_binary(&args.out, &data.pairs)?;
    } else {
        save_pairs(&args.out, &data.pairs)?;
    }
    rec.output(&args.out)?;
    if let Some(path) = &args.truth_out {
        save_prototype(path, &data.truth)?;
        rec.output(path)?;
    }
    rec.finish(ctx.manifest.as_deref())
}

pub fn random_proto(ctx: &Context, args: RandomProtoArgs) -> CliResult<()> {
    let settings = Settings::resolve(&ctx.file, &args.common, ctx.workers).with_phenomenon(args.phenomenon.as_ref());
    let mut proto = random_prototype(args.dim, args.magnitude, settings.seed, settings.backend)?;
    proto.meta.phenomenon = settings.phenomenon_or_default();
    proto.meta.language = "random".into();
    proto.meta.model_id = settings.model_id.clone();

    let mut rec = Recorder::new(
        "random-proto",
        serde_json::json!({ "settings": settings, "dim": args.dim, "magnitude": args.magnitude }),
        Some(settings.seed),
    );
    save_prototype(&args.out, &proto)?;
    rec.output(&args.out)?;
    rec.finish(ctx.manifest.as_deref())
}
