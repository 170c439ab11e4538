//! Porting prototypes between embedding spaces.
//!
//! A [`SpaceMap`] is a linear operator `W: R^d_src -> R^d_tgt` fitted on
//! paired anchor embeddings by ridge-regularized least squares,
//! optionally after reducing each side to its top principal directions
//! (uncentered, so the map stays linear). Prototypes are ported by mapping
//! the pole and the shift vector, restoring tangency at the mapped pole and
//! rotating the result back onto the target space's `e1`.
//!
//! This module stores `W` densely and is not bound by the O(d) memory rules
//! of the geometry code.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{score_grid, split, TransferConfig, TransferMatrix};
use crate::prototype::{Pair, Prototype};
use crate::rotor::{build_rotor, RotorBackend};
use crate::sphere::{exp_map, log_map, TangentVector, UnitVector, ZERO_NORM};
use crate::vecops::{dot, norm};

// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceMap {
    pub d_src: usize,
    pub d_tgt: usize,
    /// Row-major `d_tgt x d_src`.
    pub matrix: Vec<f64>,
    pub source_model_id: String,
    pub target_model_id: String,
    pub n_anchors: usize,
    pub pca_rank: Option<usize>,
    pub ridge: f64,
}

/// How a prototype crosses the map.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortMode {
    /// Map the shift as a vector, then project onto the mapped pole's
    /// tangent space.
    #[default]
    Tangent,
    /// Map the point `exp_{e1}(p)` and take the logarithm at the mapped pole.
    Ambient,
}

impl std::str::FromStr for PortMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tangent" => Ok(Self::Tangent),
            "ambient" => Ok(Self::Ambient),
            other => Err(Error::InvalidArgument(format!(
                "unknown port mode {other:?} (expected tangent or ambient)"
            ))),
        }
    }
}

impl SpaceMap {
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        Self {
            d_src: dim,
            d_tgt: dim,
            matrix,
            source_model_id: String::new(),
            target_model_id: String::new(),
            n_anchors: 0,
            pca_rank: None,
            ridge: 0.0,
        }
    }

    pub fn with_models(mut self, source: &str, target: &str) -> Self {
        self.source_model_id = source.into();
        self.target_model_id = target.into();
        self
    }

    /// `W x`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d_src {
            return Err(Error::DimensionMismatch {
                expected: self.d_src,
                found: x.len(),
            });
        }
        Ok(self.matrix.chunks(self.d_src).map(|row| dot(row, x)).collect())
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.d_tgt).map(|i| self.matrix[i * self.d_src + j]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|x| x.is_finite())
    }
}

fn stack(rows: &[UnitVector]) -> DMatrix<f64> {
    let d = rows[0].dim();
    DMatrix::from_fn(rows.len(), d, |i, j| rows[i].as_slice()[j])
}

/// Top-`k` right singular vectors of `m` as columns (`cols(m) x k`).
fn principal_directions(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    DMatrix::from_fn(m.ncols(), k, |i, j| v_t[(order[j], i)])
}

/// Solves `min_B ‖X B - Y‖² + ridge ‖B‖²` through the SVD of `X`.
fn ridge_solve(x: &DMatrix<f64>, y: &DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    let svd = x.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V"));
    let s = &svd.singular_values;
    let s_max = s.iter().copied().fold(0.0, f64::max);
    let rank = s.iter().filter(|&&si| si > RANK_TOL * s_max).count();
    if ridge == 0.0 && rank < x.ncols() {
        return Err(Error::RankDeficient {
            rank,
            required: x.ncols(),
        });
    }
    let gain = DVector::from_iterator(
        s.len(),
        s.iter().map(|&si| {
            if ridge == 0.0 {
                1.0 / si
            } else {
                si / (si * si + ridge)
            }
        }),
    );
    // B = V diag(gain) Uᵀ Y
    let uty = u.transpose() * y;
    let scaled = DMatrix::from_fn(uty.nrows(), uty.ncols(), |i, j| gain[i] * uty[(i, j)]);
    Ok(v_t.transpose() * scaled)
}

/// Fits `W` with `W x_i ≈ y_i` over the anchor pairs.
///
/// With `pca_rank = Some(k)` both sides are first projected on their top `k`
/// principal directions and `W = P_tgt B P_srcᵀ`. Without ridge, a rank
/// deficient design is an error rather than a minimum-norm solution.
pub fn fit_map(
    anchors_src: &[UnitVector],
    anchors_tgt: &[UnitVector],
    pca_rank: Option<usize>,
    ridge: f64,
) -> Result<SpaceMap> {
    if anchors_src.len() != anchors_tgt.len() {
        return Err(Error::InvalidArgument(format!(
            "anchor counts differ: {} source vs {} target",
            anchors_src.len(),
            anchors_tgt.len()
        )));
    }
    let n = anchors_src.len();
    if n < 2 {
        return Err(Error::RankDeficient {
            rank: n,
            required: 2,
        });
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge {ridge} must be finite and >= 0")));
    }
    for set in [anchors_src, anchors_tgt] {
        let d = set[0].dim();
        if let Some(bad) = set.iter().find(|a| a.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
    }
    let x = stack(anchors_src);
    let y = stack(anchors_tgt);
    let (d_src, d_tgt) = (x.ncols(), y.ncols());

    let w = match pca_rank {
        None => ridge_solve(&x, &y, ridge)?.transpose(),
        Some(k) => {
            if k == 0 || k > n.min(d_src).min(d_tgt) {
                return Err(Error::InvalidArgument(format!(
                    "pca rank {k} must lie in [1, {}]",
                    n.min(d_src).min(d_tgt)
                )));
            }
            let px = principal_directions(&x, k);
            let py = principal_directions(&y, k);
            let b = ridge_solve(&(&x * &px), &(&y * &py), ridge)?;
            &py * b.transpose() * px.transpose()
        }
    };
    let matrix: Vec<f64> = (0..d_tgt)
        .flat_map(|i| (0..d_src).map(move |j| (i, j)))
        .map(|(i, j)| w[(i, j)])
        .collect();
    Ok(SpaceMap {
        d_src,
        d_tgt,
        matrix,
        source_model_id: String::new(),
        target_model_id: String::new(),
        n_anchors: n,
        pca_rank,
        ridge,
    })
}

/// Carries a prototype into the target space and re-anchors it at the
/// target pole. Both the source and the mapped magnitude are recorded.
pub fn port_prototype(p: &Prototype, map: &SpaceMap, mode: PortMode) -> Result<Prototype> {
    if p.dim() != map.d_src {
        return Err(Error::DimensionMismatch {
            expected: map.d_src,
            found: p.dim(),
        });
    }
    if map.d_tgt < 2 {
        return Err(Error::DimensionTooSmall { dim: map.d_tgt });
    }
    let mapped_pole = map.column(0);
    let pole_norm = norm(&mapped_pole);
    if !pole_norm.is_finite() || pole_norm <= ZERO_NORM {
        return Err(Error::ZeroVector { norm: pole_norm });
    }
    let pole = UnitVector::new(&mapped_pole)?;

    let tangent = match mode {
        PortMode::Tangent => TangentVector::project(pole.clone(), map.apply(p.as_slice())?)?,
        PortMode::Ambient => {
            let src_pole = UnitVector::basis(p.dim(), 0)?;
            let point = exp_map(&TangentVector::new(src_pole, p.as_slice().to_vec())?);
            let image = UnitVector::new(&map.apply(point.as_slice())?)?;
            log_map(&pole, &image)?
        }
    };
    let (_, mut vec) = tangent.into_parts();
    // Re-anchor with the plane rotation whatever the prototype's backend: it
    // tends to the identity as the mapped pole approaches e1, where a
    // reflection would flip an arbitrary direction.
    build_rotor(&pole, RotorBackend::Givens).apply_in_place(&mut vec)?;
    vec[0] = 0.0;

    let mut meta = p.meta.clone();
    meta.source_model_id = Some(map.source_model_id.clone());
    meta.model_id = map.target_model_id.clone();
    meta.source_magnitude = Some(p.magnitude());
    meta.mapped_magnitude = Some(norm(&vec));
    Prototype::new(vec, p.pair_count(), p.backend(), meta)
}

/// Scores ported source prototypes (rows) on the held-out split of each
/// target-space dataset (columns).
pub fn cross_model_eval(
    src_protos: &[(String, Prototype)],
    map: &SpaceMap,
    tgt_datasets: &[(String, Vec<Pair>)],
    cfg: &TransferConfig,
    mode: PortMode,
) -> Result<TransferMatrix> {
    let rows: Vec<(String, Prototype)> = src_protos
        .iter()
        .map(|(lang, p)| Ok((lang.clone(), port_prototype(p, map, mode)?)))
        .collect::<Result<_>>()?;
    let cols: Vec<(String, Vec<Pair>)> = tgt_datasets
        .iter()
        .map(|(lang, pairs)| {
            let pairs: Vec<Pair> = pairs
                .iter()
                .filter(|p| p.phenomenon == cfg.phenomenon)
                .cloned()
                .collect();
            if pairs.is_empty() {
                return Err(Error::EmptyPairSet);
            }
            let (_, test) = split(&pairs, cfg.train_fraction, cfg.seed)?;
            Ok((lang.clone(), test))
        })
        .collect::<Result<_>>()?;
    score_grid(&rows, &cols, &cfg.phenomenon, &map.target_model_id, cfg.backend)
}
