//! Elliptic curves over Q: invariants, group law, minimal models, reduction
//! types and rational torsion.

mod curve;
mod minimal;
mod point;
mod reduction;
mod torsion;

pub use curve::{Isomorphism, WeierstrassCurve};
pub use minimal::{is_globally_minimal, MinimalModel};
pub use point::ECPoint;
pub use reduction::{ReductionInfo, ReductionType};
pub use torsion::{TorsionSubgroup, MAX_TORSION_ORDER};

pub(crate) use curve::int;
