//! Rotor-invariant shift estimation (RISE) on the unit hypersphere.
//!
//! Sentence embeddings are treated as points on `S^(d-1)`. A semantic
//! transformation (negation, politeness, ...) is learned from
//! neutral/variant pairs as a single tangent vector at the pole `e1`, and
//! replayed at a new embedding by rotating it into that embedding's tangent
//! space and following the geodesic.
//!
//! ```
//! use rise_core::{learn_prototype, predict, Pair, RotorBackend, UnitVector};
//!
//! let n = UnitVector::new(&[1.0, 0.0, 0.0]).unwrap();
//! let v = UnitVector::new(&[0.8, 0.6, 0.0]).unwrap();
//! let pair = Pair::new("p0", "en", "negation", n.clone(), v.clone()).unwrap();
//! let proto = learn_prototype(&[pair], RotorBackend::Householder).unwrap();
//! let again = predict(&n, &proto, RotorBackend::Householder).unwrap();
//! assert!((again.dot(&v) - 1.0).abs() < 1e-12);
//! ```

pub mod cross_model;
pub mod error;
pub mod eval;
pub mod io;
pub mod prototype;
pub mod rotor;
pub mod sphere;
pub mod synth;
pub mod vecops;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use prototype::{
    apply_sequence, canonicalize_pair, commutativity_gap, learn_prototype, predict, Pair,
    Prototype, PrototypeMeta,
};
pub use rotor::{build_rotor, CanonicalPole, Rotor, RotorBackend};
pub use sphere::{
    exp_map, geodesic_distance, log_map, normalize, parallel_transport, NormPolicy, TangentVector,
    UnitVector,
};
