//! Shared fixtures for the benchmarks.

use rise_core::synth::{generate, substream, uniform_sphere_point, SynthSpec};
use rise_core::{Pair, UnitVector};

pub const DIMS: [usize; 4] = [256, 1024, 4096, 16384];

/// Two independent uniform points of `S^(dim-1)`, fixed per dimension.
pub fn point_pair(dim: usize) -> (UnitVector, UnitVector) {
    let mut rng = substream(0xbe4c, dim as u64);
    (uniform_sphere_point(dim, &mut rng), uniform_sphere_point(dim, &mut rng))
}

/// A noisy planted corpus.
pub fn corpus(dim: usize, n: usize) -> Vec<Pair> {
    generate(&SynthSpec::new(dim, n, 0.4, 0.01, 7))
        .expect("valid spec")
        .pairs
}

/// The rotor of `n` materialized as a dense row-major `d x d` matrix, for
/// comparison with the matrix-free application.
pub fn dense_householder(n: &UnitVector) -> Vec<f64> {
    let d = n.dim();
    let mut w = n.as_slice().to_vec();
    w[0] -= 1.0;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = f64::from(u8::from(i == j)) - 2.0 * w[i] * w[j] / ww;
        }
    }
    m
}

pub fn dense_apply(m: &[f64], x: &[f64]) -> Vec<f64> {
    m.chunks_exact(x.len())
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}
