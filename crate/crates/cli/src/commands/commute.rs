use rayon::prelude::*;
use rise_core::eval::loglog_slope;
use rise_core::io::load_prototype;
use rise_core::synth::{substream, uniform_sphere_point};
use rise_core::{commutativity_gap, Error, Prototype};
use serde::Serialize;

use super::{emit, to_json, Context};
use crate::cli::CommuteArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::manifest::Recorder;

/// Base points are kept away from the poles ±e1, where the rotor frames
/// degenerate and the second-order constant blows up.
pub const MAX_POLE_COS: f64 = 0.8;
pub const SLOPE_BAND: [f64; 2] = [1.8, 2.2];

#[derive(Serialize)]
struct Sample {
    gaps: Vec<f64>,
    /// Absent when any gap is exactly zero.
    slope: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    backend: rise_core::RotorBackend,
    dim: usize,
    scales: Vec<f64>,
    samples: Vec<Sample>,
    max_gap: f64,
    median_slope: Option<f64>,
    band: [f64; 2],
    in_band: usize,
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

fn validate(args: &CommuteArgs) -> CliResult<()> {
    if args.scales.len() < 3 {
        return Err(CliError::Usage(format!(
            "--scales needs at least 3 values to fit a slope, got {}",
            args.scales.len()
        )));
    }
    if args.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(CliError::Usage("--scales must be positive".into()));
    }
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    Ok(())
}

pub fn run(ctx: &Context, args: CommuteArgs) -> CliResult<()> {
    validate(&args)?;
    let a = load_prototype(&args.proto_a)?;
    let b = load_prototype(&args.proto_b)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        }
        .into());
    }
    let mut settings = Settings::resolve(&ctx.file, &args.common, ctx.workers);
    settings.backend = args.common.backend.unwrap_or(a.backend());
    let mut rec = Recorder::new(
        "commute",
        serde_json::json!({ "settings": settings, "scales": args.scales, "samples": args.samples }),
        Some(settings.seed),
    );
    rec.input(&args.proto_a)?;
    rec.input(&args.proto_b)?;

    let scaled: Vec<(Prototype, Prototype)> = args
        .scales
        .iter()
        .map(|&s| Ok((a.scaled(s)?, b.scaled(s)?)))
        .collect::<rise_core::Result<_>>()?;
    let dim = a.dim();
    let samples: Vec<Sample> = (0..args.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(settings.seed, i as u64);
            let n0 = loop {
                let n = uniform_sphere_point(dim, &mut rng);
                if n.as_slice()[0].abs() < MAX_POLE_COS {
                    break n;
                }
            };
            let gaps = scaled
                .iter()
                .map(|(sa, sb)| commutativity_gap(&n0, sa, sb, settings.backend))
                .collect::<rise_core::Result<Vec<f64>>>()?;
            let slope = gaps.iter().all(|g| *g > 0.0).then(|| loglog_slope(&args.scales, &gaps));
            Ok(Sample { gaps, slope })
        })
        .collect::<rise_core::Result<_>>()?;

    let slopes: Vec<f64> = samples.iter().filter_map(|s| s.slope).collect();
    let report = Report {
        backend: settings.backend,
        dim,
        max_gap: samples.iter().flat_map(|s| s.gaps.iter().copied()).fold(0.0, f64::max),
        median_slope: median(slopes.clone()),
        band: SLOPE_BAND,
        in_band: slopes.iter().filter(|s| (SLOPE_BAND[0]..=SLOPE_BAND[1]).contains(*s)).count(),
        scales: args.scales.clone(),
        samples,
    };
    match report.median_slope {
        Some(m) => eprintln!(
            "median slope {m:.4}; {}/{} samples in [{}, {}]",
            report.in_band, args.samples, SLOPE_BAND[0], SLOPE_BAND[1]
        ),
        None => eprintln!("all gaps are zero (max {:e}); the prototypes commute", report.max_gap),
    }

    emit(args.out.as_deref(), &to_json(&report))?;
    if let Some(path) = &args.out {
        rec.output(path)?;
    }
    rec.finish(ctx.manifest.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }
}
