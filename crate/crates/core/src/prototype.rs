//! Shift prototypes: learning a semantic transformation as one tangent
//! vector at the canonical pole, and replaying it at new base points.
//!
//! For each neutral/variant pair the shift `log_n(v)` is rotated into the
//! frame at `e1` by the pair's rotor, the rotated shifts are averaged, and a
//! prediction at `n*` walks the geodesic `exp_{n*}(R(n*)ᵀ p)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotor::{build_rotor, RotorBackend};
use crate::sphere::{
    exp_map, geodesic_distance, log_map, TangentVector, UnitVector, ANTIPODAL_COS, TANGENT_TOL,
};
use crate::vecops::{axpy, dot, norm};

/// A neutral sentence embedding and its transformed variant.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub id: String,
    pub language: String,
    pub phenomenon: String,
    neutral: UnitVector,
    variant: UnitVector,
}

impl Pair {
    pub fn new(
        id: impl Into<String>,
        language: impl Into<String>,
        phenomenon: impl Into<String>,
        neutral: UnitVector,
        variant: UnitVector,
    ) -> Result<Self> {
        if neutral.dim() != variant.dim() {
            return Err(Error::DimensionMismatch {
                expected: neutral.dim(),
                found: variant.dim(),
            });
        }
        let cos = neutral.dot(&variant);
        if cos <= ANTIPODAL_COS {
            return Err(Error::AntipodalPair { cos });
        }
        Ok(Self {
            id: id.into(),
            language: language.into(),
            phenomenon: phenomenon.into(),
            neutral,
            variant,
        })
    }

    pub fn neutral(&self) -> &UnitVector {
        &self.neutral
    }

    pub fn variant(&self) -> &UnitVector {
        &self.variant
    }

    pub fn dim(&self) -> usize {
        self.neutral.dim()
    }
}

/// Provenance carried alongside a prototype.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrototypeMeta {
    pub phenomenon: String,
    pub language: String,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
    /// Set on prototypes ported from another embedding space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_magnitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapped_magnitude: Option<f64>,
}

/// A learned shift: a tangent vector at `e1`, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    vec: Vec<f64>,
    pair_count: usize,
    backend: RotorBackend,
    pub meta: PrototypeMeta,
}

impl Prototype {
    /// Validates tangency at `e1`, `pair_count >= 1` and `‖vec‖ < π`.
    pub fn new(
        vec: Vec<f64>,
        pair_count: usize,
        backend: RotorBackend,
        meta: PrototypeMeta,
    ) -> Result<Self> {
        if vec.len() < 2 {
            return Err(Error::DimensionTooSmall { dim: vec.len() });
        }
        if pair_count == 0 {
            return Err(Error::InvalidArgument("pair_count must be at least 1".into()));
        }
        let magnitude = norm(&vec);
        if !magnitude.is_finite() || magnitude >= std::f64::consts::PI {
            return Err(Error::InvalidArgument(format!(
                "prototype magnitude {magnitude} must be finite and below π"
            )));
        }
        if vec[0].abs() > TANGENT_TOL * magnitude.max(1.0) {
            return Err(Error::NotTangent { residual: vec[0] });
        }
        Ok(Self {
            vec,
            pair_count,
            backend,
            meta,
        })
    }

    pub fn zero(dim: usize, backend: RotorBackend) -> Result<Self> {
        Self::new(vec![0.0; dim], 1, backend, PrototypeMeta::default())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vec
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    /// Geodesic length of the shift, in radians.
    pub fn magnitude(&self) -> f64 {
        norm(&self.vec)
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn backend(&self) -> RotorBackend {
        self.backend
    }

    /// The same direction with magnitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let vec = self.vec.iter().map(|x| x * factor).collect();
        Self::new(vec, self.pair_count, self.backend, self.meta.clone())
    }
}

/// `R(n) log_n(v)`: the pair's shift expressed in the frame at `e1`.
pub fn canonicalize_pair(pair: &Pair, backend: RotorBackend) -> Result<Vec<f64>> {
    let shift = log_map(&pair.neutral, &pair.variant)?;
    let rotor = build_rotor(&pair.neutral, backend);
    let (_, mut vec) = shift.into_parts();
    rotor.apply_in_place(&mut vec)?;
    Ok(vec)
}

// Pairs canonicalized concurrently per batch; the sum is always sequential.
const LEARN_BATCH: usize = 1024;

/// Mean of the canonicalized shifts of `pairs`, summed in input order.
///
/// All pairs must share a dimension and a phenomenon tag. The result does
/// not depend on the size of the rayon pool it runs in.
pub fn learn_prototype(pairs: &[Pair], backend: RotorBackend) -> Result<Prototype> {
    let first = pairs.first().ok_or(Error::EmptyPairSet)?;
    let dim = first.dim();
    for (index, p) in pairs.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::MixedDimensions {
                index,
                expected: dim,
                found: p.dim(),
            });
        }
        if p.phenomenon != first.phenomenon {
            return Err(Error::MixedPhenomena {
                index,
                expected: first.phenomenon.clone(),
                found: p.phenomenon.clone(),
            });
        }
    }

    let mut sum = vec![0.0; dim];
    for batch in pairs.chunks(LEARN_BATCH) {
        let shifts: Vec<Vec<f64>> = batch
            .par_iter()
            .map(|p| canonicalize_pair(p, backend))
            .collect::<Result<_>>()?;
        for s in &shifts {
            axpy(1.0, s, &mut sum);
        }
    }
    let m = pairs.len() as f64;
    sum.iter_mut().for_each(|x| *x /= m);
    sum[0] = 0.0;

    let language = if pairs.iter().all(|p| p.language == first.language) {
        first.language.clone()
    } else {
        "mixed".to_string()
    };
    let meta = PrototypeMeta {
        phenomenon: first.phenomenon.clone(),
        language,
        ..PrototypeMeta::default()
    };
    Prototype::new(sum, pairs.len(), backend, meta)
}

/// `exp_{n*}(R(n*)ᵀ p)`: replays the prototype at `n_star`.
pub fn predict(n_star: &UnitVector, proto: &Prototype, backend: RotorBackend) -> Result<UnitVector> {
    if proto.backend != backend {
        return Err(Error::BackendMismatch {
            expected: proto.backend,
            found: backend,
        });
    }
    if proto.dim() != n_star.dim() {
        return Err(Error::DimensionMismatch {
            expected: proto.dim(),
            found: n_star.dim(),
        });
    }
    if proto.vec.iter().all(|&x| x == 0.0) {
        return Ok(n_star.clone());
    }
    let rotor = build_rotor(n_star, backend);
    let mut t = proto.vec.clone();
    rotor.apply_transpose_in_place(&mut t)?;
    // Rᵀ e1 = n*, so t is tangent up to rounding; remove the residue.
    let along = dot(&t, n_star.as_slice());
    axpy(-along, n_star.as_slice(), &mut t);
    let xi = TangentVector::new(n_star.clone(), t)?;
    Ok(exp_map(&xi))
}

/// Folds [`predict`] over `protos` from left to right.
pub fn apply_sequence(
    n0: &UnitVector,
    protos: &[Prototype],
    backend: RotorBackend,
) -> Result<UnitVector> {
    protos
        .iter()
        .try_fold(n0.clone(), |n, p| predict(&n, p, backend))
}

/// Geodesic distance between applying `a` then `b` and `b` then `a`.
pub fn commutativity_gap(
    n0: &UnitVector,
    a: &Prototype,
    b: &Prototype,
    backend: RotorBackend,
) -> Result<f64> {
    let ab = apply_sequence(n0, &[a.clone(), b.clone()], backend)?;
    let ba = apply_sequence(n0, &[b.clone(), a.clone()], backend)?;
    Ok(geodesic_distance(&ab, &ba))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::dist;
    use std::f64::consts::FRAC_PI_2;

    fn e(d: usize, k: usize) -> UnitVector {
        UnitVector::basis(d, k).unwrap()
    }

    fn pair(n: UnitVector, v: UnitVector) -> Pair {
        Pair::new("p", "en", "negation", n, v).unwrap()
    }

    fn proto(vec: Vec<f64>) -> Prototype {
        Prototype::new(vec, 1, RotorBackend::Householder, PrototypeMeta::default()).unwrap()
    }

    #[test]
    fn canonicalize_at_pole_is_the_log() {
        let t = canonicalize_pair(&pair(e(4, 0), e(4, 1)), RotorBackend::Householder).unwrap();
        assert!(dist(&t, &[0.0, FRAC_PI_2, 0.0, 0.0]) < 1e-15);
        let t = canonicalize_pair(&pair(e(4, 2), e(4, 2)), RotorBackend::Givens).unwrap();
        assert!(t.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn canonicalize_e2_e3_under_householder() {
        // log_{e2}(e3) = (π/2) e3; H(e2) fixes e3.
        let t = canonicalize_pair(&pair(e(3, 1), e(3, 2)), RotorBackend::Householder).unwrap();
        assert!(dist(&t, &[0.0, 0.0, FRAC_PI_2]) < 1e-15);
    }

    #[test]
    fn learn_examples() {
        let p = learn_prototype(&[pair(e(3, 0), e(3, 1))], RotorBackend::Householder).unwrap();
        assert!(dist(p.as_slice(), &[0.0, FRAC_PI_2, 0.0]) < 1e-15);
        assert_eq!(p.pair_count(), 1);
        assert_eq!(p.meta.phenomenon, "negation");

        let same: Vec<Pair> = (0..3).map(|k| pair(e(3, k), e(3, k))).collect();
        let p = learn_prototype(&same, RotorBackend::Givens).unwrap();
        assert!(p.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(p.pair_count(), 3);

        // Opposite shifts cancel.
        let pairs = [pair(e(3, 0), e(3, 1)), pair(e(3, 0), e(3, 1).antipode())];
        let p = learn_prototype(&pairs, RotorBackend::Householder).unwrap();
        assert!(p.magnitude() < 1e-15);
    }

    #[test]
    fn learn_errors() {
        assert_eq!(
            learn_prototype(&[], RotorBackend::Householder),
            Err(Error::EmptyPairSet)
        );
        let pairs = [pair(e(3, 0), e(3, 1)), pair(e(4, 0), e(4, 1))];
        assert!(matches!(
            learn_prototype(&pairs, RotorBackend::Householder),
            Err(Error::MixedDimensions { index: 1, .. })
        ));
        let mut other = pair(e(3, 0), e(3, 2));
        other.phenomenon = "politeness".into();
        let pairs = [pair(e(3, 0), e(3, 1)), other];
        assert!(matches!(
            learn_prototype(&pairs, RotorBackend::Householder),
            Err(Error::MixedPhenomena { index: 1, .. })
        ));
    }

    #[test]
    fn pair_rejects_antipodes() {
        assert!(matches!(
            Pair::new("x", "en", "neg", e(3, 0), e(3, 0).antipode()),
            Err(Error::AntipodalPair { .. })
        ));
    }

    #[test]
    fn predict_examples() {
        let p = proto(vec![0.0, FRAC_PI_2, 0.0]);
        let v = predict(&e(3, 0), &p, RotorBackend::Householder).unwrap();
        assert!(dist(v.as_slice(), e(3, 1).as_slice()) < 1e-15);

        // H(e2) sends the pole-frame shift (π/2) e2 to (π/2) e1 at e2.
        let v = predict(&e(3, 1), &p, RotorBackend::Householder).unwrap();
        assert!(dist(v.as_slice(), e(3, 0).as_slice()) < 1e-15);

        let n = UnitVector::new(&[0.1, 0.2, -0.9]).unwrap();
        let z = Prototype::zero(3, RotorBackend::Householder).unwrap();
        assert_eq!(predict(&n, &z, RotorBackend::Householder).unwrap(), n);
    }

    #[test]
    fn predict_errors() {
        let p = proto(vec![0.0, 0.1, 0.0]);
        assert!(matches!(
            predict(&e(3, 0), &p, RotorBackend::Givens),
            Err(Error::BackendMismatch { .. })
        ));
        assert!(matches!(
            predict(&e(4, 0), &p, RotorBackend::Householder),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn prototype_validation() {
        assert!(matches!(
            Prototype::new(vec![0.5, 0.1], 1, RotorBackend::Householder, Default::default()),
            Err(Error::NotTangent { .. })
        ));
        assert!(Prototype::new(vec![0.0, 0.1], 0, RotorBackend::Householder, Default::default())
            .is_err());
        assert!(Prototype::new(vec![0.0, 3.2], 1, RotorBackend::Householder, Default::default())
            .is_err());
    }

    #[test]
    fn sequence_folds() {
        let n0 = UnitVector::new(&[0.3, 0.5, -0.2, 0.6]).unwrap();
        assert_eq!(apply_sequence(&n0, &[], RotorBackend::Householder).unwrap(), n0);
        let p = proto(vec![0.0, 0.1, 0.05, 0.0]);
        assert_eq!(
            apply_sequence(&n0, std::slice::from_ref(&p), RotorBackend::Householder).unwrap(),
            predict(&n0, &p, RotorBackend::Householder).unwrap()
        );
    }

    #[test]
    fn gap_vanishes_for_trivial_orders() {
        let n0 = UnitVector::new(&[0.3, 0.5, -0.2, 0.6]).unwrap();
        let a = proto(vec![0.0, 0.1, 0.05, 0.0]);
        let z = Prototype::zero(4, RotorBackend::Householder).unwrap();
        assert!(commutativity_gap(&n0, &z, &a, RotorBackend::Householder).unwrap() < 1e-12);
        assert!(commutativity_gap(&n0, &a, &a, RotorBackend::Householder).unwrap() < 1e-12);
    }

    #[test]
    fn gap_for_small_edits_is_second_order() {
        // |pA| = |pB| = 0.1: the discrepancy is on the order of 0.01 rad, far
        // below the first-order displacement itself.
        let n0 = UnitVector::new(&[0.3, 0.5, -0.2, 0.6, 0.1]).unwrap();
        let a = proto(vec![0.0, 0.1, 0.0, 0.0, 0.0]);
        let b = proto(vec![0.0, 0.0, 0.0, 0.1, 0.0]);
        let gap = commutativity_gap(&n0, &a, &b, RotorBackend::Householder).unwrap();
        assert!(gap > 1e-4 && gap < 0.05, "gap {gap}");
    }
}
