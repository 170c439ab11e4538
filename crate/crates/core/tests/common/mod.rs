//! Independent oracles and samplers shared by the integration tests.
//!
//! Everything here is written from the closed forms, not by calling the
//! library's geometry, so agreement is evidence rather than tautology.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rise_core::synth::{substream, uniform_sphere_point};
use rise_core::UnitVector;

pub type Dense = Vec<Vec<f64>>;

pub fn identity(d: usize) -> Dense {
    (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, k) = (a.len(), b[0].len(), b.len());
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, x)| r * x).sum()).collect()
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn l2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Angle between two nonzero vectors, accurate for tiny angles.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (l2(a), l2(b));
    let ua: Vec<f64> = a.iter().map(|x| x / na).collect();
    let ub: Vec<f64> = b.iter().map(|x| x / nb).collect();
    let chord = l2_diff(&ua, &ub);
    2.0 * (chord / 2.0).min(1.0).asin()
}

/// `I - 2 w wᵀ / (wᵀ w)`, the reflection exchanging `from` and `to`.
pub fn reflection_dense(from: &[f64], to: &[f64]) -> Dense {
    let d = from.len();
    let w: Vec<f64> = from.iter().zip(to).map(|(a, b)| a - b).collect();
    let ww: f64 = w.iter().map(|x| x * x).sum();
    if ww.sqrt() < 1e-12 {
        return identity(d);
    }
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| f64::from(u8::from(i == j)) - 2.0 * w[i] * w[j] / ww)
                .collect()
        })
        .collect()
}

pub fn e(d: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k] = 1.0;
    v
}

pub fn householder_dense(n: &[f64]) -> Dense {
    reflection_dense(n, &e(n.len(), 0))
}

/// Reflect `n` onto the non-pole axis where it is smallest (lowest index on
/// ties), then that axis onto `e1`.
pub fn two_step_dense(n: &[f64]) -> Dense {
    let d = n.len();
    let mut k = 1;
    for j in 2..d {
        if n[j].abs() < n[k].abs() {
            k = j;
        }
    }
    let u = e(d, k);
    matmul(&reflection_dense(&u, &e(d, 0)), &reflection_dense(n, &u))
}

/// Multivectors of the Euclidean Clifford algebra over `R^d`, stored
/// sparsely by blade bitmask (bit `i` is basis vector `e_{i+1}`).
#[derive(Clone, Debug, Default)]
pub struct Multivector(pub BTreeMap<u32, f64>);

fn reorder_sign(a: u32, b: u32) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Multivector {
    pub fn scalar(s: f64) -> Self {
        Multivector(BTreeMap::from([(0, s)]))
    }

    pub fn vector(v: &[f64]) -> Self {
        Multivector(
            v.iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, x)| (1u32 << i, *x))
                .collect(),
        )
    }

    pub fn geometric(&self, other: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (&a, &x) in &self.0 {
            for (&b, &y) in &other.0 {
                *out.entry(a ^ b).or_insert(0.0) += reorder_sign(a, b) * x * y;
            }
        }
        Multivector(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        for (&k, &v) in &other.0 {
            *out.entry(k).or_insert(0.0) += v;
        }
        Multivector(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Multivector(self.0.iter().map(|(&k, &v)| (k, v * s)).collect())
    }

    /// Reversion: grade `g` picks up `(-1)^(g(g-1)/2)`.
    pub fn reverse(&self) -> Self {
        Multivector(
            self.0
                .iter()
                .map(|(&k, &v)| {
                    let g = k.count_ones();
                    let s = if (g * g.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    (k, s * v)
                })
                .collect(),
        )
    }

    pub fn vector_part(&self, d: usize) -> Vec<f64> {
        (0..d).map(|i| self.0.get(&(1u32 << i)).copied().unwrap_or(0.0)).collect()
    }
}

/// Matrix of `x -> r x r̃` with `r = (1 + e1 n) / sqrt(2 (1 + n1))`, the
/// rotor carrying `n` to `e1` in the plane they span.
pub fn clifford_rotor_dense(n: &[f64]) -> Dense {
    let d = n.len();
    let e1 = Multivector::vector(&e(d, 0));
    let r = Multivector::scalar(1.0)
        .add(&e1.geometric(&Multivector::vector(n)))
        .scale(1.0 / (2.0 * (1.0 + n[0])).sqrt());
    let rr = r.reverse();
    let cols: Dense = (0..d)
        .map(|j| r.geometric(&Multivector::vector(&e(d, j))).geometric(&rr).vector_part(d))
        .collect();
    transpose(&cols)
}

/// A random point of the sphere as a plain vector.
pub fn sphere_point(d: usize, rng: &mut impl Rng) -> UnitVector {
    uniform_sphere_point(d, rng)
}

pub fn gaussian(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// A uniformly random unit direction in the tangent space at `e1`.
pub fn pole_direction(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v = gaussian(d, rng);
    v[0] = 0.0;
    let n = l2(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Product of `k` random reflections whose normals are orthogonal to `e1`:
/// an orthogonal matrix with `Q e1 = e1`.
pub fn orthogonal_fixing_pole(d: usize, k: usize, seed: u64) -> Dense {
    let mut rng = substream(seed, 0);
    let mut q = identity(d);
    for _ in 0..k {
        let w = pole_direction(d, &mut rng);
        let h: Dense = (0..d)
            .map(|i| (0..d).map(|j| f64::from(u8::from(i == j)) - 2.0 * w[i] * w[j]).collect())
            .collect();
        q = matmul(&h, &q);
    }
    q
}

/// Median of a non-empty slice.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
