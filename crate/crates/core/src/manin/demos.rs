//! Two worked systems on bielliptic genus 2 curves.

use num_traits::Zero;

use super::quadratic::{split_sqrt, QuadElt};
use super::{DegreePairing, FieldPoint, MdSystem};
use crate::elliptic::{ECPoint, WeierstrassCurve};
use crate::error::Result;
use crate::height_machine::{parse_equation, PlaneCurve, RatFunc, RationalMap, SourcePoint};
use crate::Rational;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `y^2 = x^6 - 1` over `v^2 = u^3 - 1` by `(x^2, y)`. The target has rank 0,
/// the only affine rational points are `(+-1, 0)`, and the fitting corpus
/// is `(x0, sqrt(x0^6 - 1))` for `x0 = 2..10`.
pub fn rank_zero() -> Result<MdSystem> {
    let curve = PlaneCurve::new(
        "y^2=x^6-1",
        parse_equation("y^2 = x^6 - 1")?,
        vec![SourcePoint::new("(-1,0)", q(-1, 1), q(0, 1)), SourcePoint::new("(1,0)", q(1, 1), q(0, 1))],
    )?;
    let target = WeierstrassCurve::from_ints(0, 0, 0, 0, -1)?;
    let f = RationalMap::new(RatFunc::parse("x^2")?, RatFunc::y(), target, 2)?;
    let mut corpus = Vec::new();
    for x0 in 2..=10i64 {
        let y2 = q(x0.pow(6) - 1, 1);
        let (c, d) = split_sqrt(&y2).expect("x0^6 - 1 is not a square");
        corpus.push(FieldPoint::quadratic(
            format!("({x0},sqrt({}))", x0.pow(6) - 1),
            d.clone(),
            QuadElt::rational(q(x0, 1), &d),
            QuadElt::new(Rational::zero(), c, &d),
        )?);
    }
    Ok(MdSystem {
        label: "rank0".into(),
        curve,
        maps: vec![f],
        generators: vec![],
        pairing: DegreePairing::new(vec![vec![8]], 4)?,
        corpus,
        scaling: 1,
    })
}

/// `y^2 = x^6 + 8x^4 + 8x^2 + 1` with `f1 = (x^2, y)` and
/// `f2 = (1/x^2, y/x^3)` to `E: v^2 = u^3 + 8u^2 + 8u + 1`, which has rank 1
/// generated by `P = (-2, -3)` and torsion `{O, T = (-1, 0)}`.
///
/// The fitting corpus lifts `Q = nP` and `nP + T` (`n <= max_multiple`) to
/// `(sqrt(u(Q)), v(Q))` over `Q(sqrt u(Q))` when `u(Q)` is not a square;
/// there `f1` is `Q` and `f2` a point of the quadratic twist.
pub fn rank_one(max_multiple: i64) -> Result<MdSystem> {
    let mut points = Vec::new();
    for (x, y) in [(q(2, 1), q(15, 1)), (q(1, 2), q(15, 8)), (q(0, 1), q(1, 1))] {
        for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            if x.is_zero() && sx < 0 {
                continue;
            }
            let (px, py) = (&x * q(sx, 1), &y * q(sy, 1));
            points.push(SourcePoint::new(format!("({},{})", crate::arith::format_rational(&px), crate::arith::format_rational(&py)), px, py));
        }
    }
    let curve = PlaneCurve::new("y^2=x^6+8x^4+8x^2+1", parse_equation("y^2 = x^6 + 8x^4 + 8x^2 + 1")?, points)?;
    let target = WeierstrassCurve::from_ints(0, 8, 0, 8, 1)?;
    let f1 = RationalMap::new(RatFunc::parse("x^2")?, RatFunc::y(), target.clone(), 2)?;
    let f2 = RationalMap::new(RatFunc::parse("1/x^2")?, RatFunc::parse("y/x^3")?, target.clone(), 2)?;
    let gen = ECPoint::affine(q(-2, 1), q(-3, 1));
    let torsion = ECPoint::affine(q(-1, 1), q(0, 1));
    let mut corpus = Vec::new();
    for n in 1..=max_multiple {
        let np = target.scalar_mul(n, &gen)?;
        for (tag, pt) in [("", np.clone()), ("+T", target.add(&np, &torsion)?)] {
            let Some((u0, v0)) = pt.coords() else { continue };
            let Some((c, d)) = split_sqrt(u0) else { continue };
            corpus.push(FieldPoint::quadratic(
                format!("lift({n}P{tag})"),
                d.clone(),
                QuadElt::new(Rational::zero(), c, &d),
                QuadElt::rational(v0.clone(), &d),
            )?);
        }
    }
    Ok(MdSystem {
        label: "rank1".into(),
        curve,
        maps: vec![f1, f2],
        generators: vec![gen],
        pairing: DegreePairing::from_degrees(&[2, 2], &[vec![0, 4], vec![0, 0]])?,
        corpus,
        scaling: 1,
    })
}

/// The rank-1 system with `f2` dropped: one map, rank one, no bound.
pub fn rank_one_single_map() -> Result<MdSystem> {
    let mut s = rank_one(4)?;
    s.label = "rank1-single".into();
    s.maps.truncate(1);
    s.pairing = DegreePairing::new(vec![vec![8]], 4)?;
    Ok(s)
}

