use std::fmt;

use num_traits::Zero;

use super::curve::{int, WeierstrassCurve};
use crate::arith::format_rational;
use crate::error::Result;
use crate::Rational;

/// A rational point, either the origin at infinity or an affine pair.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ECPoint {
    Infinity,
    Affine { x: Rational, y: Rational },
}

impl ECPoint {
    pub fn affine(x: Rational, y: Rational) -> Self {
        ECPoint::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ECPoint::Infinity)
    }

    pub fn coords(&self) -> Option<(&Rational, &Rational)> {
        match self {
            ECPoint::Infinity => None,
            ECPoint::Affine { x, y } => Some((x, y)),
        }
    }

    pub fn x(&self) -> Option<&Rational> {
        match self {
            ECPoint::Infinity => None,
            ECPoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&Rational> {
        match self {
            ECPoint::Infinity => None,
            ECPoint::Affine { y, .. } => Some(y),
        }
    }
}

impl fmt::Debug for ECPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ECPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ECPoint::Infinity => write!(f, "inf"),
            ECPoint::Affine { x, y } => write!(f, "({}, {})", format_rational(x), format_rational(y)),
        }
    }
}

impl WeierstrassCurve {
    pub fn neg(&self, p: &ECPoint) -> ECPoint {
        match p {
            ECPoint::Infinity => ECPoint::Infinity,
            ECPoint::Affine { x, y } => ECPoint::Affine { x: x.clone(), y: -y - self.a1() * x - self.a3() },
        }
    }

    /// Chord and tangent addition. Both points are checked against the curve.
    pub fn add(&self, p: &ECPoint, q: &ECPoint) -> Result<ECPoint> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.add_unchecked(p, q))
    }

    pub fn sub(&self, p: &ECPoint, q: &ECPoint) -> Result<ECPoint> {
        self.add(p, &self.neg(q))
    }

    pub(crate) fn add_unchecked(&self, p: &ECPoint, q: &ECPoint) -> ECPoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (ECPoint::Infinity, _) => return q.clone(),
            (_, ECPoint::Infinity) => return p.clone(),
            (ECPoint::Affine { x: x1, y: y1 }, ECPoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let [a1, a2, a3, a4, a6] = self.coeffs();
        let (lambda, nu) = if x1 == x2 {
            if (y1 + y2 + a1 * x2 + a3).is_zero() {
                return ECPoint::Infinity;
            }
            let den = int(2) * y1 + a1 * x1 + a3;
            let lambda = (int(3) * x1 * x1 + int(2) * a2 * x1 + a4 - a1 * y1) / &den;
            let nu = (-(x1 * x1 * x1) + a4 * x1 + int(2) * a6 - a3 * y1) / &den;
            (lambda, nu)
        } else {
            let dx = x2 - x1;
            ((y2 - y1) / &dx, (y1 * x2 - y2 * x1) / &dx)
        };
        let x3 = &lambda * &lambda + a1 * &lambda - a2 - x1 - x2;
        let y3 = -(&lambda + a1) * &x3 - nu - a3;
        ECPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &ECPoint) -> Result<ECPoint> {
        self.add(p, p)
    }

    /// `n * P` by double and add.
    pub fn scalar_mul(&self, n: i64, p: &ECPoint) -> Result<ECPoint> {
        self.check_point(p)?;
        Ok(self.scalar_mul_unchecked(n, p))
    }

    pub(crate) fn scalar_mul_unchecked(&self, n: i64, p: &ECPoint) -> ECPoint {
        let mut base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = ECPoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.add_unchecked(&base, &base);
            }
        }
        acc
    }

    /// Sum of `coeffs[i] * points[i]`.
    pub fn combine(&self, coeffs: &[i64], points: &[ECPoint]) -> Result<ECPoint> {
        let mut acc = ECPoint::Infinity;
        for (c, p) in coeffs.iter().zip(points) {
            acc = self.add_unchecked(&acc, &self.scalar_mul(*c, p)?);
        }
        Ok(acc)
    }

    /// Order of `p` if it is at most `cap`.
    pub fn order_up_to(&self, p: &ECPoint, cap: u32) -> Option<u32> {
        let mut q = p.clone();
        for n in 1..=cap {
            if q.is_infinity() {
                return Some(n);
            }
            q = self.add_unchecked(&q, p);
        }
        None
    }
}
