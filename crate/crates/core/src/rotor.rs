//! Canonicalizing rotors: orthogonal operators `R(n)` with `R(n) n = e_pole`.
//!
//! A rotor is stored as one or two direction vectors and applied in O(d)
//! time; no `d x d` matrix is ever formed. Three backends are available:
//!
//! * [`RotorBackend::Householder`]: the reflection `I - 2 w wᵀ / ‖w‖²` with
//!   `w = n - e_pole` (determinant -1, symmetric).
//! * [`RotorBackend::Givens`]: the rotation in the plane spanned by `n` and
//!   `e_pole`, identity on the orthogonal complement (determinant +1).
//! * [`RotorBackend::TwoStep`]: a reflection `n -> u` onto an auxiliary basis
//!   vector `u ⟂ e_pole`, followed by the reflection `u -> e_pole`.
//!
//! Near `n = -e_pole` the first two backends delegate to the two-step
//! construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::UnitVector;
use crate::vecops::{axpy, dist, dot, norm, norm_sq};

/// `‖n - e_pole‖` below this yields the identity rotor.
pub const IDENTITY_TOL: f64 = 1e-12;
/// `<n, e_pole>` below this switches Householder/Givens to the two-step rotor.
pub const TWO_STEP_COS: f64 = -1.0 + 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotorBackend {
    #[default]
    Householder,
    Givens,
    TwoStep,
}

impl RotorBackend {
    pub const ALL: [RotorBackend; 3] = [
        RotorBackend::Householder,
        RotorBackend::Givens,
        RotorBackend::TwoStep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RotorBackend::Householder => "householder",
            RotorBackend::Givens => "givens",
            RotorBackend::TwoStep => "two_step",
        }
    }
}

impl fmt::Display for RotorBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RotorBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "householder" => Ok(RotorBackend::Householder),
            "givens" => Ok(RotorBackend::Givens),
            "two_step" | "twostep" => Ok(RotorBackend::TwoStep),
            other => Err(Error::InvalidArgument(format!(
                "unknown rotor backend {other:?} (expected householder, givens or two_step)"
            ))),
        }
    }
}

/// Index of the reference direction `e_pole`; `e1` (index 0) by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CanonicalPole(usize);

impl CanonicalPole {
    pub fn new(index: usize, dim: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "pole index {index} out of range for dimension {dim}"
            )));
        }
        Ok(Self(index))
    }

    pub fn index(self) -> usize {
        self.0
    }
}

/// `x -> x - (2 / ‖w‖²) w <w, x>`
#[derive(Debug, Clone)]
struct Reflector {
    w: Vec<f64>,
    scale: f64,
}

impl Reflector {
    /// Reflection swapping unit vectors `from` and `to`; `None` if they coincide.
    fn between(from: &[f64], to: &[f64]) -> Option<Self> {
        let w: Vec<f64> = from.iter().zip(to).map(|(a, b)| a - b).collect();
        let w_sq = norm_sq(&w);
        if w_sq.sqrt() < IDENTITY_TOL {
            return None;
        }
        Some(Self {
            w,
            scale: 2.0 / w_sq,
        })
    }

    #[inline]
    fn reflect(&self, x: &mut [f64]) {
        let k = self.scale * dot(&self.w, x);
        axpy(-k, &self.w, x);
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Reflection(Reflector),
    /// `n = c e_pole + s u` with `u ⟂ e_pole` unit.
    PlaneRotation {
        u: Vec<f64>,
        c: f64,
        s: f64,
    },
    TwoStep {
        first: Option<Reflector>,
        second: Reflector,
    },
}

/// An implicit orthogonal operator mapping a base point onto the pole.
#[derive(Debug, Clone)]
pub struct Rotor {
    backend: RotorBackend,
    pole: usize,
    dim: usize,
    kind: Kind,
}

/// Builds `R(n)` with `R(n) n = e1`.
pub fn build_rotor(n: &UnitVector, backend: RotorBackend) -> Rotor {
    Rotor::with_pole(n, backend, CanonicalPole::default())
}

impl Rotor {
    pub fn new(n: &UnitVector, backend: RotorBackend) -> Self {
        build_rotor(n, backend)
    }

    pub fn with_pole(n: &UnitVector, backend: RotorBackend, pole: CanonicalPole) -> Self {
        let dim = n.dim();
        let p = pole.index();
        assert!(p < dim, "pole index {p} out of range for dimension {dim}");
        let x = n.as_slice();

        let identity = {
            let off: f64 = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| if i == p { (xi - 1.0).powi(2) } else { xi * xi })
                .sum();
            off.sqrt() < IDENTITY_TOL
        };
        let kind = if identity {
            Kind::Identity
        } else if backend == RotorBackend::TwoStep || x[p] < TWO_STEP_COS {
            two_step(x, p)
        } else {
            match backend {
                RotorBackend::Householder => {
                    let mut pole_vec = vec![0.0; dim];
                    pole_vec[p] = 1.0;
                    Kind::Reflection(
                        Reflector::between(x, &pole_vec).expect("non-identity reflection"),
                    )
                }
                RotorBackend::Givens => {
                    let mut u = x.to_vec();
                    u[p] = 0.0;
                    let s = norm(&u);
                    let h = x[p].hypot(s);
                    u.iter_mut().for_each(|ui| *ui /= s);
                    Kind::PlaneRotation {
                        u,
                        c: x[p] / h,
                        s: s / h,
                    }
                }
                RotorBackend::TwoStep => unreachable!(),
            }
        };
        Rotor {
            backend,
            pole: p,
            dim,
            kind,
        }
    }

    /// The identity rotor (the one built at `n = e_pole`).
    pub fn identity(dim: usize, backend: RotorBackend) -> Self {
        Rotor {
            backend,
            pole: 0,
            dim,
            kind: Kind::Identity,
        }
    }

    /// The backend that was requested; see [`Rotor::effective_backend`].
    pub fn backend(&self) -> RotorBackend {
        self.backend
    }

    /// The construction actually in use after identity/antipodal handling.
    /// `None` means the identity operator.
    pub fn effective_backend(&self) -> Option<RotorBackend> {
        match self.kind {
            Kind::Identity => None,
            Kind::Reflection(_) => Some(RotorBackend::Householder),
            Kind::PlaneRotation { .. } => Some(RotorBackend::Givens),
            Kind::TwoStep { .. } => Some(RotorBackend::TwoStep),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pole(&self) -> usize {
        self.pole
    }

    /// Sign of the determinant of the operator.
    pub fn orientation(&self) -> i8 {
        match &self.kind {
            Kind::Identity | Kind::PlaneRotation { .. } => 1,
            Kind::Reflection(_) => -1,
            Kind::TwoStep { first, .. } => {
                if first.is_some() {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// `R x`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    /// `Rᵀ x`
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        self.apply_transpose_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check_dim(x)?;
        match &self.kind {
            Kind::Identity => {}
            Kind::Reflection(h) => h.reflect(x),
            Kind::PlaneRotation { u, c, s } => self.rotate(x, u, *c, *s),
            Kind::TwoStep { first, second } => {
                if let Some(h) = first {
                    h.reflect(x);
                }
                second.reflect(x);
            }
        }
        Ok(())
    }

    pub fn apply_transpose_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check_dim(x)?;
        match &self.kind {
            Kind::Identity => {}
            Kind::Reflection(h) => h.reflect(x),
            Kind::PlaneRotation { u, c, s } => self.rotate(x, u, *c, -*s),
            Kind::TwoStep { first, second } => {
                second.reflect(x);
                if let Some(h) = first {
                    h.reflect(x);
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn rotate(&self, x: &mut [f64], u: &[f64], c: f64, s: f64) {
        let xp = x[self.pole];
        let xu = dot(u, x);
        let new_p = c * xp + s * xu;
        let new_u = -s * xp + c * xu;
        // u has a zero at the pole, so the update leaves x[pole] untouched.
        axpy(new_u - xu, u, x);
        x[self.pole] = new_p;
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Largest `|R(n) n - e_pole|` component error, used in self-checks.
    pub fn defect(&self, n: &UnitVector) -> f64 {
        let image = self.apply(n.as_slice()).expect("dimension checked by caller");
        let mut pole = vec![0.0; self.dim];
        pole[self.pole] = 1.0;
        dist(&image, &pole)
    }
}

/// `n -> u -> e_pole`, where `u = e_k` for the `k != pole` minimizing `|n_k|`
/// (lowest index on ties).
fn two_step(x: &[f64], pole: usize) -> Kind {
    let dim = x.len();
    let k = (0..dim)
        .filter(|&i| i != pole)
        .min_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()).then(a.cmp(&b)))
        .expect("dim >= 2");
    let mut u = vec![0.0; dim];
    u[k] = 1.0;
    let mut pole_vec = vec![0.0; dim];
    pole_vec[pole] = 1.0;
    Kind::TwoStep {
        first: Reflector::between(x, &u),
        second: Reflector::between(&u, &pole_vec).expect("u ⟂ e_pole"),
    }
}
