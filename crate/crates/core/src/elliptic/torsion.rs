//! Rational torsion by Lutz-Nagell on the short model
//! `Y^2 = X^3 - 27 c4 X - 54 c6` of the minimal model.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::curve::WeierstrassCurve;
use super::point::ECPoint;
use crate::arith::factor;
use crate::error::Result;
use crate::Rational;

/// Cap on torsion orders over Q, used only to verify candidates.
pub const MAX_TORSION_ORDER: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionSubgroup {
    /// All torsion points, the origin first, then by order and coordinates.
    pub points: Vec<ECPoint>,
    /// Invariant factors: `[]` trivial, `[n]` cyclic, `[2, n]` for Z/2 x Z/n.
    pub structure: Vec<u32>,
}

impl TorsionSubgroup {
    pub(crate) fn compute(e: &WeierstrassCurve) -> Result<Self> {
        let m = e.minimal_model()?;
        let min = &m.curve;
        let c4 = min.c4().numer().clone();
        let c6 = min.c6().numer().clone();
        let a = BigInt::from(-27) * &c4;
        let b = BigInt::from(-54) * &c6;
        // 4A^3 + 27B^2 = -2^8 3^12 disc, so its factorization comes from disc.
        let mut exps = factor(min.discriminant().numer().magnitude(), crate::arith::DEFAULT_FACTOR_BOUND)?;
        bump(&mut exps, 2, 8);
        bump(&mut exps, 3, 12);

        // Candidate y are 0 and the positive y with y^2 dividing 4A^3 + 27B^2.
        let mut ys = vec![BigInt::one()];
        for (p, e2) in &exps {
            let mut next = Vec::new();
            for y in &ys {
                let mut pk = BigInt::one();
                for _ in 0..=(e2 / 2) {
                    next.push(y * &pk);
                    pk *= BigInt::from(p.clone());
                }
            }
            ys = next;
        }
        let mut ys: BTreeSet<BigInt> = ys.into_iter().collect();
        ys.insert(BigInt::zero());

        let b2 = min.b2().clone();
        let (a1, a3) = (min.a1().clone(), min.a3().clone());
        let mut found: BTreeSet<(u32, ECPoint)> = BTreeSet::new();
        found.insert((1, ECPoint::Infinity));
        for y in &ys {
            let c = &b - y * y;
            for x in integer_roots(&a, &c) {
                for ys in [y.clone(), -y.clone()] {
                    let xm = (Rational::from_integer(x.clone()) - Rational::from_integer(3.into()) * &b2)
                        / Rational::from_integer(36.into());
                    let ym = (Rational::from_integer(ys) / Rational::from_integer(108.into()) - &a1 * &xm - &a3)
                        / Rational::from_integer(2.into());
                    let p = ECPoint::affine(xm, ym);
                    if !min.contains(&p) {
                        continue;
                    }
                    if let Some(n) = min.order_up_to(&p, MAX_TORSION_ORDER) {
                        found.insert((n, m.iso.pull_point(&p)));
                    }
                }
            }
        }
        let points: Vec<ECPoint> = found.into_iter().map(|(_, p)| p).collect();
        debug_assert!(points.iter().all(|p| e.contains(p)));
        let two_torsion = points.iter().filter(|p| e.order_up_to(p, 2) == Some(2)).count();
        let n = points.len() as u32;
        let structure = if two_torsion == 3 {
            vec![2, n / 2]
        } else if n == 1 {
            vec![]
        } else {
            vec![n]
        };
        Ok(TorsionSubgroup { points, structure })
    }

    pub fn order(&self) -> u32 {
        self.points.len() as u32
    }

    pub fn contains(&self, p: &ECPoint) -> bool {
        self.points.contains(p)
    }

    pub fn label(&self) -> String {
        match self.structure.as_slice() {
            [] => "trivial".into(),
            [n] => format!("Z/{n}"),
            [a, b] => format!("Z/{a} x Z/{b}"),
            _ => unreachable!(),
        }
    }
}

fn bump(exps: &mut Vec<(BigUint, u32)>, p: u32, by: u32) {
    let p = BigUint::from(p);
    match exps.iter_mut().find(|(q, _)| *q == p) {
        Some(entry) => entry.1 += by,
        None => {
            exps.push((p, by));
            exps.sort();
        }
    }
}

/// Integer roots of `x^3 + a x + c`, found by bisection on monotone pieces.
pub(crate) fn integer_roots(a: &BigInt, c: &BigInt) -> Vec<BigInt> {
    let f = |x: &BigInt| x * x * x + a * x + c;
    let bound = a.abs().max(c.abs()) + BigInt::one();
    let mut pieces: Vec<(BigInt, BigInt, bool)> = Vec::new();
    if !a.is_negative() {
        pieces.push((-bound.clone(), bound, true));
    } else {
        // Critical points at +-sqrt(-a/3).
        let m = -a;
        let mut lo = (&m / BigInt::from(3)).sqrt();
        while BigInt::from(3) * (&lo + 1) * (&lo + 1) <= m {
            lo += 1;
        }
        while BigInt::from(3) * &lo * &lo > m {
            lo -= 1;
        }
        let hi = if BigInt::from(3) * &lo * &lo == m { lo.clone() } else { &lo + 1 };
        pieces.push((-bound.clone(), -hi.clone(), true));
        pieces.push((-lo.clone(), lo, false));
        pieces.push((hi, bound, true));
    }
    let mut roots = BTreeSet::new();
    for (lo, hi, increasing) in pieces {
        if lo > hi {
            continue;
        }
        let sign = |x: &BigInt| {
            let v = f(x);
            if increasing {
                v
            } else {
                -v
            }
        };
        let (mut l, mut h) = (lo, hi);
        if sign(&l).is_positive() || sign(&h).is_negative() {
            continue;
        }
        while &h - &l > BigInt::one() {
            let mid: BigInt = (&l + &h) >> 1;
            if sign(&mid).is_negative() {
                l = mid;
            } else {
                h = mid;
            }
        }
        for x in [l, h] {
            if f(&x).is_zero() {
                roots.insert(x);
            }
        }
    }
    roots.into_iter().collect()
}
