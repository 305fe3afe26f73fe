//! Canonical heights on elliptic curves over Q and the machinery built on
//! them: local height decompositions, heights on the G_m-torsor of a
//! rigidified bundle, Mordell-Weil lattices, Weil heights on curves mapping
//! to elliptic curves, and Manin-Dem'janenko height bounds.
//!
//! Real-valued computations are generic over [`Real`]; [`Float`] is the
//! arbitrary precision instance used for certified digits and `f64` the
//! fast one.

pub mod arith;
pub mod bigfloat;
pub mod corpus;
pub mod elliptic;
pub mod error;
pub mod gm_torsor;
pub mod height_machine;
pub mod heights;
pub mod json;
pub mod manin;
pub mod mordell_weil;
pub mod scalar;

pub use bigfloat::BigFloat;
pub use elliptic::{ECPoint, WeierstrassCurve};
pub use error::{Error, Result};
pub use scalar::{Precision, Real};

/// Exact rationals.
pub type Rational = num_rational::BigRational;
/// Arbitrary precision reals.
pub type Float = BigFloat;
