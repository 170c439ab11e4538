use rise_core::eval::{complexity_probe, ComplexityReport};
use serde::Serialize;

use super::{emit, to_json, Context};
use crate::cli::BenchArgs;
use crate::config::Settings;
use crate::error::CliResult;
use crate::manifest::{Machine, Recorder};

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    report: ComplexityReport,
    machine: Machine,
}

pub fn run(ctx: &Context, args: BenchArgs) -> CliResult<()> {
    let settings = Settings::resolve(&ctx.file, &args.common, ctx.workers);
    let mut rec = Recorder::new(
        "bench",
        serde_json::json!({ "settings": settings, "dims": args.dims, "reps": args.reps }),
        None,
    );
    rec.machine();

    let report = complexity_probe(&args.dims, args.reps, settings.backend)?;
    for p in &report.points {
        eprintln!("d = {:>6}: {:>12.1} ns per cycle", p.dim, p.ns_per_op);
    }
    eprintln!("log-log slope {:.3}", report.slope);

    let report = Report {
        report,
        machine: Machine::detect(),
    };
    emit(args.out.as_deref(), &to_json(&report))?;
    if let Some(path) = &args.out {
        rec.output(path)?;
    }
    rec.finish(ctx.manifest.as_deref())
}
