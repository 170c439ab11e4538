use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rotor::{build_rotor, RotorBackend};
use crate::sphere::{exp_map, log_map, TangentVector};
use crate::synth::{substream, uniform_sphere_point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityPoint {
    pub dim: usize,
    /// Median wall time of one log + canonicalize + transpose + exp cycle.
    pub ns_per_op: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub backend: RotorBackend,
    pub reps: usize,
    pub points: Vec<ComplexityPoint>,
    /// Least-squares slope of `ln(ns_per_op)` against `ln(dim)`.
    pub slope: f64,
}

// Element operations per timed batch; keeps every batch well above timer
// resolution without making large dimensions slow.
const BATCH_WORK: usize = 1 << 21;

/// Times the per-pair RISE cycle at each dimension.
///
/// One warm-up batch is discarded per dimension, then the median of `reps`
/// batches is reported.
pub fn complexity_probe(dims: &[usize], reps: usize, backend: RotorBackend) -> Result<ComplexityReport> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    if dims.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "complexity probe needs at least 4 dimensions, got {}",
            dims.len()
        )));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) || dims[0] < 2 {
        return Err(Error::InvalidArgument(
            "dimensions must be strictly ascending and at least 2".into(),
        ));
    }

    let mut points = Vec::with_capacity(dims.len());
    for &dim in dims {
        let mut rng = substream(0x5eed, dim as u64);
        let n = uniform_sphere_point(dim, &mut rng);
        let v = uniform_sphere_point(dim, &mut rng);
        let iters = (BATCH_WORK / dim).max(4);

        let cycle = || -> Result<()> {
            let shift = log_map(&n, &v)?;
            let rotor = build_rotor(&n, backend);
            let (_, mut t) = shift.into_parts();
            rotor.apply_in_place(&mut t)?;
            rotor.apply_transpose_in_place(&mut t)?;
            let out = exp_map(&TangentVector::project(n.clone(), t)?);
            black_box(out);
            Ok(())
        };

        let mut samples = Vec::with_capacity(reps);
        for rep in 0..=reps {
            let start = Instant::now();
            for _ in 0..iters {
                cycle()?;
            }
            let ns = start.elapsed().as_nanos() as f64 / iters as f64;
            if rep > 0 {
                samples.push(ns);
            }
        }
        samples.sort_by(f64::total_cmp);
        let median = if reps % 2 == 1 {
            samples[reps / 2]
        } else {
            0.5 * (samples[reps / 2 - 1] + samples[reps / 2])
        };
        points.push(ComplexityPoint {
            dim,
            ns_per_op: median,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.dim as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ns_per_op).collect();
    Ok(ComplexityReport {
        backend,
        reps,
        slope: loglog_slope(&xs, &ys),
        points,
    })
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
