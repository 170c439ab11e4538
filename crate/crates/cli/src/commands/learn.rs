use rise_core::io::save_prototype;
use rise_core::learn_prototype;

use super::{load_corpus, select, Context};
use crate::cli::LearnArgs;
use crate::config::Settings;
use crate::error::CliResult;
use crate::manifest::Recorder;

pub fn run(ctx: &Context, args: LearnArgs) -> CliResult<()> {
    let settings = Settings::resolve(&ctx.file, &args.common, ctx.workers)
        .with_phenomenon(args.phenomenon.as_ref())
        .with_model_id(args.model_id.as_ref());
    let mut rec = Recorder::new("learn", &settings, None);
    rec.input(&args.pairs)?;

    let pairs = select(load_corpus(&args.pairs, settings.norm_policy)?, settings.phenomenon.as_deref());
    let mut proto = learn_prototype(&pairs, settings.backend)?;
    proto.meta.model_id = settings.model_id.clone();
    eprintln!(
        "learned {} from {} pairs, magnitude {:.6} rad",
        proto.meta.phenomenon,
        proto.pair_count(),
        proto.magnitude()
    );

    save_prototype(&args.out, &proto)?;
    rec.output(&args.out)?;
    rec.finish(ctx.manifest.as_deref())
}
