//! Synthetic pair datasets with a planted shift.
//!
//! Each pair is drawn as `n_i ~ base distribution` and
//! `v_i = exp_{n_i}(R(n_i)ᵀ (p_true + eps_i))`, where `eps_i` is isotropic
//! Gaussian noise in the tangent space at `e1` with standard deviation
//! `noise_sigma` per coordinate. With zero noise, learning a prototype from
//! the pairs recovers `p_true` exactly.
//!
//! All randomness comes from ChaCha8 seeded with `seed`: stream 0 draws
//! `p_true`, stream `i + 1` draws pair `i`. Datasets are therefore
//! reproducible across platforms and can be generated in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prototype::{Pair, Prototype, PrototypeMeta};
use crate::rotor::{build_rotor, RotorBackend};
use crate::sphere::{exp_map, TangentVector, UnitVector};
use crate::vecops::{axpy, dot, norm};

// Noisy shifts longer than this are redrawn so no pair lands near an antipode.
const MAX_SHIFT: f64 = std::f64::consts::PI - 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseDistribution {
    UniformSphere,
    /// Geodesic ball around `center`; the angular distance is uniform in
    /// `[0, radius]`.
    Cap { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub dim: usize,
    pub n_pairs: usize,
    /// `‖p_true‖`, radians.
    pub planted_magnitude: f64,
    /// Per-coordinate standard deviation of the tangent noise, radians.
    pub noise_sigma: f64,
    pub base: BaseDistribution,
    pub seed: u64,
    pub backend: RotorBackend,
    pub language: String,
    pub phenomenon: String,
}

impl SynthSpec {
    pub fn new(dim: usize, n_pairs: usize, planted_magnitude: f64, noise_sigma: f64, seed: u64) -> Self {
        Self {
            dim,
            n_pairs,
            planted_magnitude,
            noise_sigma,
            base: BaseDistribution::UniformSphere,
            seed,
            backend: RotorBackend::Householder,
            language: "synth".into(),
            phenomenon: "planted".into(),
        }
    }

    pub fn with_tags(mut self, language: &str, phenomenon: &str) -> Self {
        self.language = language.into();
        self.phenomenon = phenomenon.into();
        self
    }

    pub fn with_backend(mut self, backend: RotorBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall { dim: self.dim });
        }
        if self.n_pairs == 0 {
            return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
        }
        let theta = self.planted_magnitude;
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "planted magnitude {theta} must lie in [0, π/2)"
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise sigma {} must be finite and non-negative",
                self.noise_sigma
            )));
        }
        if let BaseDistribution::Cap { center, radius } = &self.base {
            if center.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: center.len(),
                });
            }
            if !(*radius > 0.0 && *radius < std::f64::consts::PI) {
                return Err(Error::InvalidArgument(format!(
                    "cap radius {radius} must lie in (0, π)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub pairs: Vec<Pair>,
    pub truth: Prototype,
}

/// The RNG for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A uniformly distributed point on `S^(dim-1)`.
pub fn uniform_sphere_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitVector {
    loop {
        let raw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = UnitVector::new(&raw) {
            return u;
        }
    }
}

/// A uniformly random unit direction in the tangent space at `e1`, scaled to
/// `magnitude`.
fn pole_tangent<R: Rng + ?Sized>(dim: usize, magnitude: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        v[0] = 0.0;
        let n = norm(&v);
        if n > 1e-12 {
            let k = magnitude / n;
            v.iter_mut().for_each(|x| *x *= k);
            return v;
        }
    }
}

/// A prototype with uniformly random direction in `T_{e1}` and norm exactly
/// `magnitude`.
pub fn random_prototype(
    dim: usize,
    magnitude: f64,
    seed: u64,
    backend: RotorBackend,
) -> Result<Prototype> {
    random_prototype_with(dim, magnitude, backend, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_prototype_with<R: Rng + ?Sized>(
    dim: usize,
    magnitude: f64,
    backend: RotorBackend,
    rng: &mut R,
) -> Result<Prototype> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { dim });
    }
    if !(magnitude > 0.0 && magnitude < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!(
            "random prototype magnitude {magnitude} must lie in (0, π)"
        )));
    }
    let vec = pole_tangent(dim, magnitude, rng);
    let meta = PrototypeMeta {
        phenomenon: "random".into(),
        ..PrototypeMeta::default()
    };
    Prototype::new(vec, 1, backend, meta)
}

fn sample_base<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> UnitVector {
    match &spec.base {
        BaseDistribution::UniformSphere => uniform_sphere_point(spec.dim, rng),
        BaseDistribution::Cap { center, radius } => {
            let center = UnitVector::new(center).expect("validated cap center");
            let mut dir: Vec<f64> = (0..spec.dim).map(|_| rng.sample(StandardNormal)).collect();
            let along = dot(&dir, center.as_slice());
            axpy(-along, center.as_slice(), &mut dir);
            let n = norm(&dir);
            let angle = radius * rng.random::<f64>();
            dir.iter_mut().for_each(|x| *x *= angle / n);
            exp_map(&TangentVector::project(center, dir).expect("same dim"))
        }
    }
}

/// Draws the dataset described by `spec`.
pub fn generate(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let truth_vec = if spec.planted_magnitude == 0.0 {
        vec![0.0; spec.dim]
    } else {
        pole_tangent(spec.dim, spec.planted_magnitude, &mut substream(spec.seed, 0))
    };
    let meta = PrototypeMeta {
        phenomenon: spec.phenomenon.clone(),
        language: spec.language.clone(),
        model_id: "synthetic".into(),
        ..PrototypeMeta::default()
    };
    let truth = Prototype::new(truth_vec, spec.n_pairs, spec.backend, meta)?;

    let pairs = (0..spec.n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(spec.seed, i as u64 + 1);
            let n = sample_base(spec, &mut rng);
            let shift = loop {
                let mut t = truth.as_slice().to_vec();
                if spec.noise_sigma > 0.0 {
                    for x in t.iter_mut().skip(1) {
                        *x += spec.noise_sigma * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                if norm(&t) < MAX_SHIFT {
                    break t;
                }
            };
            let v = if shift.iter().all(|&x| x == 0.0) {
                n.clone()
            } else {
                let mut t = shift;
                build_rotor(&n, spec.backend).apply_transpose_in_place(&mut t)?;
                exp_map(&TangentVector::project(n.clone(), t)?)
            };
            Pair::new(
                format!("{}-{}-{i:06}", spec.language, spec.phenomenon),
                spec.language.clone(),
                spec.phenomenon.clone(),
                n,
                v,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthDataset { pairs, truth })
}
