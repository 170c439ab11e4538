//! Round unit-sphere geometry on `S^(d-1)`.
//!
//! Points are [`UnitVector`]s, displacements are [`TangentVector`]s attached
//! to a base point. The exponential and logarithmic maps follow great circles:
//!
//! ```text
//! exp_n(xi) = cos(|xi|) n + sin(|xi|) xi / |xi|
//! log_n(v)  = theta (v - <n,v> n) / |v - <n,v> n|,   theta = angle(n, v)
//! ```
//!
//! Every routine is O(d) in time and memory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops::{axpy, dot, norm};

/// Below this norm a raw vector is treated as zero.
pub const ZERO_NORM: f64 = 1e-12;
/// Cosines above this are the "same point" for the logarithmic map.
pub const SAME_POINT_COS: f64 = 1.0 - 1e-12;
/// Cosines at or below this are antipodal.
pub const ANTIPODAL_COS: f64 = -1.0 + 1e-9;
/// Tangent norms below this use the first-order exponential.
pub const SMALL_ANGLE: f64 = 1e-12;
/// Tolerance on `|‖x‖ - 1|` for a [`UnitVector`].
pub const UNIT_TOL: f64 = 1e-9;
/// Tolerance on `|<vec, base>| / max(1, ‖vec‖)` for a [`TangentVector`].
pub const TANGENT_TOL: f64 = 1e-9;
/// Norm deviation above which the `Warn` policy records a diagnostic.
pub const NORM_WARN_DRIFT: f64 = 0.01;

// Vectors already this close to unit length are stored verbatim, which makes
// normalization idempotent and file round trips bit-exact.
const KEEP_VERBATIM: f64 = 1e-13;

/// How ingest treats embeddings whose raw norm is far from one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormPolicy {
    /// Normalize silently; loaders abort on the first bad record.
    #[default]
    Strict,
    /// Normalize, but report vectors whose norm drifts more than 1% from one.
    Warn,
}

/// Diagnostic produced by [`normalize`] under [`NormPolicy::Warn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormDrift {
    pub raw_norm: f64,
}

/// A point on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalizes `raw` without diagnostics.
    pub fn new(raw: &[f64]) -> Result<Self> {
        normalize(raw, NormPolicy::Strict).map(|(u, _)| u)
    }

    /// Wraps coordinates that are already unit length (within `1e-9`)
    /// without touching them.
    pub fn try_from_unit(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall { dim: coords.len() });
        }
        let n = norm(&coords);
        if (n - 1.0).abs() > UNIT_TOL || !n.is_finite() {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self { coords })
    }

    /// The standard basis vector `e_{index}` (zero-based).
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall { dim });
        }
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut coords = vec![0.0; dim];
        coords[index] = 1.0;
        Ok(Self { coords })
    }

    /// Renormalizes a vector produced by internal arithmetic that is known
    /// to be non-zero.
    pub(crate) fn from_raw_unchecked(mut coords: Vec<f64>) -> Self {
        let n = norm(&coords);
        debug_assert!(n > ZERO_NORM);
        if (n - 1.0).abs() > KEEP_VERBATIM {
            let inv = 1.0 / n;
            coords.iter_mut().for_each(|c| *c *= inv);
        }
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        dot(&self.coords, &other.coords)
    }

    /// The antipode `-self`.
    pub fn antipode(&self) -> UnitVector {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

impl<'de> Deserialize<'de> for UnitVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        UnitVector::new(&coords).map_err(serde::de::Error::custom)
    }
}

/// A vector in the tangent space `T_base S^(d-1)`; its norm is an arc
/// length in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: UnitVector,
    vec: Vec<f64>,
}

impl TangentVector {
    /// Validates tangency to `base` within `1e-9 * max(1, ‖vec‖)`.
    pub fn new(base: UnitVector, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: vec.len(),
            });
        }
        let residual = dot(&vec, base.as_slice());
        if residual.abs() > TANGENT_TOL * norm(&vec).max(1.0) {
            return Err(Error::NotTangent { residual });
        }
        Ok(Self { base, vec })
    }

    /// Orthogonally projects `vec` onto the tangent space at `base`.
    pub fn project(base: UnitVector, mut vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: vec.len(),
            });
        }
        let along = dot(&vec, base.as_slice());
        axpy(-along, base.as_slice(), &mut vec);
        Ok(Self { base, vec })
    }

    pub fn zero(base: UnitVector) -> Self {
        let vec = vec![0.0; base.dim()];
        Self { base, vec }
    }

    pub fn base(&self) -> &UnitVector {
        &self.base
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vec
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    /// Arc length of the displacement, in radians.
    pub fn norm(&self) -> f64 {
        norm(&self.vec)
    }

    pub fn into_parts(self) -> (UnitVector, Vec<f64>) {
        (self.base, self.vec)
    }
}

/// Scales `raw` to unit length.
///
/// Under [`NormPolicy::Warn`] a [`NormDrift`] is returned when the raw norm
/// differs from one by more than 1%.
pub fn normalize(raw: &[f64], policy: NormPolicy) -> Result<(UnitVector, Option<NormDrift>)> {
    if raw.len() < 2 {
        return Err(Error::DimensionTooSmall { dim: raw.len() });
    }
    let n = norm(raw);
    if !n.is_finite() || n <= ZERO_NORM {
        return Err(Error::ZeroVector { norm: n });
    }
    let drift = match policy {
        NormPolicy::Warn if (n - 1.0).abs() > NORM_WARN_DRIFT => Some(NormDrift { raw_norm: n }),
        _ => None,
    };
    let coords = if (n - 1.0).abs() <= KEEP_VERBATIM {
        raw.to_vec()
    } else {
        raw.iter().map(|x| x / n).collect()
    };
    Ok((UnitVector { coords }, drift))
}

/// Riemannian exponential: walks `‖xi‖` radians from `xi.base()` along the
/// great circle in direction `xi`.
pub fn exp_map(xi: &TangentVector) -> UnitVector {
    let base = xi.base.as_slice();
    let theta = xi.norm();
    if theta == 0.0 {
        return xi.base.clone();
    }
    if theta < SMALL_ANGLE {
        let coords: Vec<f64> = base.iter().zip(&xi.vec).map(|(b, v)| b + v).collect();
        return UnitVector::from_raw_unchecked(coords);
    }
    let (s, c) = theta.sin_cos();
    let k = s / theta;
    let coords: Vec<f64> = base
        .iter()
        .zip(&xi.vec)
        .map(|(b, v)| c * b + k * v)
        .collect();
    UnitVector::from_raw_unchecked(coords)
}

/// Riemannian logarithm: the tangent vector at `n` pointing to `v` whose
/// norm is the geodesic distance between them.
pub fn log_map(n: &UnitVector, v: &UnitVector) -> Result<TangentVector> {
    check_dims(n, v)?;
    if n.coords == v.coords {
        return Ok(TangentVector::zero(n.clone()));
    }
    let c = n.dot(v);
    if c <= ANTIPODAL_COS {
        return Err(Error::AntipodalPair { cos: c });
    }
    // Rejection of v from n: tangent, with norm sin(theta).
    let mut u = v.coords.clone();
    axpy(-c, &n.coords, &mut u);
    if c > SAME_POINT_COS {
        // theta < 1.5e-6: sin(theta) = theta to better than 1e-18.
        return TangentVector::project(n.clone(), u);
    }
    let u_norm = norm(&u);
    let theta = u_norm.atan2(c);
    let k = theta / u_norm;
    u.iter_mut().for_each(|x| *x *= k);
    Ok(TangentVector {
        base: n.clone(),
        vec: u,
    })
}

/// Great-circle distance in `[0, π]`.
pub fn geodesic_distance(a: &UnitVector, b: &UnitVector) -> f64 {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch");
    if a.coords == b.coords {
        return 0.0;
    }
    let c = a.dot(b);
    // Same rejection as `log_map`, so ‖log_a(b)‖ matches this to rounding.
    let rej_sq: f64 = a
        .coords
        .iter()
        .zip(&b.coords)
        .map(|(ai, bi)| {
            let r = bi - c * ai;
            r * r
        })
        .sum();
    if c > SAME_POINT_COS {
        return rej_sq.sqrt();
    }
    rej_sq.sqrt().atan2(c)
}

/// Parallel transport of `xi` along the minimizing geodesic from
/// `xi.base()` to `to`.
///
/// Only the component in the plane spanned by the two endpoints rotates:
/// `P(xi) = xi - <to, xi> / (1 + <from, to>) * (from + to)`.
pub fn parallel_transport(xi: &TangentVector, to: &UnitVector) -> Result<TangentVector> {
    let from = &xi.base;
    check_dims(from, to)?;
    let c = from.dot(to);
    if c <= ANTIPODAL_COS {
        return Err(Error::AntipodalPair { cos: c });
    }
    if from.coords == to.coords {
        return Ok(xi.clone());
    }
    let k = dot(&xi.vec, &to.coords) / (1.0 + c);
    let vec: Vec<f64> = xi
        .vec
        .iter()
        .zip(from.coords.iter().zip(&to.coords))
        .map(|(x, (f, t))| x - k * (f + t))
        .collect();
    TangentVector::project(to.clone(), vec)
}

fn check_dims(a: &UnitVector, b: &UnitVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}
