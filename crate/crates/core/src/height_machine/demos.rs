//! Diagnostic set-ups on 389a1, the rank 2 curve `y^2 + y = x^3 + x^2 - 2x`.
//! `P = (-1, 1)` and `R = (0, 0)` generate its Mordell-Weil group; corpora
//! are the multiples `kP`, and translations are by `Q = P + 2R = (-2, -1)`.
//!
//! `Q` is almost orthogonal to `P`: `b(P, Q) = 0.30` against
//! `h(Q) sqrt(h(P)) = 0.76`. Along `kP` the pairing-class residual is
//! `k b(P, Q) + h(Q)`, so its ratio to `1 + sqrt(h(kP))` decreases in `k`.
//! With `Q = R` instead the ratio climbs towards its limit from below.

use super::{BundleQuadruple, RationalMap, SourcePoint};
use crate::corpus;
use crate::elliptic::ECPoint;
use crate::error::Result;

/// Inputs of `degree_ratio_diagnostic`.
#[derive(Clone, Debug)]
pub struct RatioDemo {
    pub name: &'static str,
    pub q0: BundleQuadruple,
    pub q: BundleQuadruple,
    pub deg_l0: i64,
    pub deg_l: u32,
    pub corpus: Vec<SourcePoint>,
}

/// Inputs of `additivity_diagnostic`.
#[derive(Clone, Debug)]
pub struct AdditivityDemo {
    pub name: &'static str,
    pub q1: BundleQuadruple,
    pub q2: BundleQuadruple,
    pub q12: BundleQuadruple,
    pub corpus: Vec<SourcePoint>,
}

fn multiples(max_k: i64) -> Result<Vec<SourcePoint>> {
    let c = corpus::curve("389a1");
    (1..=max_k)
        .map(|k| {
            let p = c.curve.scalar_mul(k, &c.generators[0])?;
            let (x, y) = p.coords().expect("non-torsion multiple");
            Ok(SourcePoint::new(format!("{k}P"), x.clone(), y.clone()))
        })
        .collect()
}

fn setup() -> (RationalMap, ECPoint, BundleQuadruple) {
    let c = corpus::curve("389a1");
    let id = RationalMap::identity(&c.curve);
    let l = BundleQuadruple::single(id.clone(), 2);
    let q = c.curve.combine(&[1, 2], &c.generators).expect("Q is a point of 389a1");
    (id, q, l)
}

/// `L0 = t_Q^* M (x) M^{-1}`, of degree 0 and height `h(P + Q) - h(P)`,
/// against `L = M = O(2(O))`.
pub fn pairing_class(max_k: i64) -> Result<RatioDemo> {
    let (id, t, l) = setup();
    let q0 = BundleQuadruple::single(id.translated(&t)?, 2).tensor(&l.power(-1));
    Ok(RatioDemo { name: "pairing-class", q0, q: l, deg_l0: 0, deg_l: 2, corpus: multiples(max_k)? })
}

/// `L0 = L^2` against `L`: residuals vanish identically.
pub fn tensor_power(max_k: i64) -> Result<RatioDemo> {
    let (_, _, l) = setup();
    Ok(RatioDemo { name: "tensor-power", q0: l.power(2), q: l.clone(), deg_l0: 4, deg_l: 2, corpus: multiples(max_k)? })
}

/// `L1 = M`, `L2 = t_Q^* M` and `L12` their literal concatenation.
pub fn concatenation(max_k: i64) -> Result<AdditivityDemo> {
    let (id, t, l) = setup();
    let q2 = BundleQuadruple::single(id.translated(&t)?, 2);
    Ok(AdditivityDemo { name: "concatenation", q12: l.tensor(&q2), q1: l, q2, corpus: multiples(max_k)? })
}

/// `t_Q^* M (x) t_{-Q}^* M` against `M^2` presented directly; the theorem of
/// the square makes them isomorphic, and the heights differ by `2 h(Q)`.
pub fn square(max_k: i64) -> Result<AdditivityDemo> {
    let (id, t, _) = setup();
    let q1 = BundleQuadruple::single(id.translated(&t)?, 2);
    let q2 = BundleQuadruple::single(id.translated(&id.target.neg(&t))?, 2);
    let q12 = BundleQuadruple::single(id, 4);
    Ok(AdditivityDemo { name: "square", q1, q2, q12, corpus: multiples(max_k)? })
}
