//! Points over a quadratic field `K = Q(sqrt d)` and their canonical heights.
//!
//! Heights over `K` reduce to heights over `Q`: with `s` the conjugation,
//! `R + sR` lies in `E(Q)` and `R - sR` is a rational point of the quadratic
//! twist `E^d` after the isomorphism over `K`, so the parallelogram law gives
//! `h(R) = (h(R + sR) + h(R - sR)) / 4`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::format_rational;
use crate::elliptic::{ECPoint, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::heights::canonical_height;
use crate::scalar::{Precision, Real};
use crate::Rational;

/// `a + b sqrt(d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadElt {
    pub a: Rational,
    pub b: Rational,
    d: BigInt,
}

impl QuadElt {
    pub fn new(a: Rational, b: Rational, d: &BigInt) -> Self {
        QuadElt { a, b, d: d.clone() }
    }

    pub fn rational(a: Rational, d: &BigInt) -> Self {
        QuadElt::new(a, Rational::zero(), d)
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadElt { a: self.a.clone(), b: -&self.b, d: self.d.clone() }
    }

    pub fn norm(&self) -> Rational {
        &self.a * &self.a - Rational::from_integer(self.d.clone()) * &self.b * &self.b
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(QuadElt { a: &self.a / &n, b: -&self.b / &n, d: self.d.clone() })
    }

    fn scalar(&self, c: i64) -> Self {
        let c = Rational::from_integer(c.into());
        QuadElt { a: &self.a * &c, b: &self.b * &c, d: self.d.clone() }
    }
}

impl fmt::Display for QuadElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&format_rational(&self.a));
        }
        write!(f, "{} + {}*sqrt({})", format_rational(&self.a), format_rational(&self.b), self.d)
    }
}

impl Add for QuadElt {
    type Output = QuadElt;
    fn add(self, o: QuadElt) -> QuadElt {
        QuadElt { a: self.a + o.a, b: self.b + o.b, d: self.d }
    }
}

impl Sub for QuadElt {
    type Output = QuadElt;
    fn sub(self, o: QuadElt) -> QuadElt {
        QuadElt { a: self.a - o.a, b: self.b - o.b, d: self.d }
    }
}

impl Neg for QuadElt {
    type Output = QuadElt;
    fn neg(self) -> QuadElt {
        QuadElt { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Mul for QuadElt {
    type Output = QuadElt;
    fn mul(self, o: QuadElt) -> QuadElt {
        let d = Rational::from_integer(self.d.clone());
        let a = &self.a * &o.a + d * &self.b * &o.b;
        let b = &self.a * &o.b + &self.b * &o.a;
        QuadElt { a, b, d: self.d }
    }
}

/// A point of `E(K)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KPoint {
    Infinity,
    Affine { x: QuadElt, y: QuadElt },
}

impl KPoint {
    pub fn from_rational(p: &ECPoint, d: &BigInt) -> Self {
        match p.coords() {
            None => KPoint::Infinity,
            Some((x, y)) => KPoint::Affine { x: QuadElt::rational(x.clone(), d), y: QuadElt::rational(y.clone(), d) },
        }
    }

    /// The point itself when both coordinates are rational.
    pub fn to_rational(&self) -> Option<ECPoint> {
        match self {
            KPoint::Infinity => Some(ECPoint::Infinity),
            KPoint::Affine { x, y } if x.is_rational() && y.is_rational() => {
                Some(ECPoint::affine(x.a.clone(), y.a.clone()))
            }
            _ => None,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            KPoint::Infinity => KPoint::Infinity,
            KPoint::Affine { x, y } => KPoint::Affine { x: x.conj(), y: y.conj() },
        }
    }
}

impl fmt::Display for KPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KPoint::Infinity => f.write_str("inf"),
            KPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// `E` over `Q(sqrt d)` together with its quadratic twist.
#[derive(Clone, Debug)]
pub struct CurveOverK {
    pub curve: WeierstrassCurve,
    pub d: BigInt,
    pub twist: WeierstrassCurve,
}

/// `d` is a perfect square (so `Q(sqrt d) = Q`).
pub fn is_square(d: &BigInt) -> bool {
    !d.is_negative() && {
        let r = d.sqrt();
        &r * &r == *d
    }
}

impl CurveOverK {
    pub fn new(curve: &WeierstrassCurve, d: BigInt) -> Result<Self> {
        if d.is_zero() || is_square(&d) {
            return Err(Error::Domain(format!("{d} is a square, not a quadratic field")));
        }
        Ok(CurveOverK { twist: twist(curve, &d)?, curve: curve.clone(), d })
    }

    fn c(&self, q: &Rational) -> QuadElt {
        QuadElt::rational(q.clone(), &self.d)
    }

    pub fn contains(&self, p: &KPoint) -> bool {
        let KPoint::Affine { x, y } = p else { return true };
        let [a1, a2, a3, a4, a6] = self.curve.coeffs();
        let (x, y) = (x.clone(), y.clone());
        let lhs = y.clone() * y.clone() + self.c(a1) * x.clone() * y.clone() + self.c(a3) * y;
        let rhs = x.clone() * x.clone() * x.clone() + self.c(a2) * x.clone() * x.clone() + self.c(a4) * x + self.c(a6);
        lhs == rhs
    }

    pub fn neg(&self, p: &KPoint) -> KPoint {
        match p {
            KPoint::Infinity => KPoint::Infinity,
            KPoint::Affine { x, y } => {
                let [a1, _, a3, _, _] = self.curve.coeffs();
                let ny = -y.clone() - self.c(a1) * x.clone() - self.c(a3);
                KPoint::Affine { x: x.clone(), y: ny }
            }
        }
    }

    pub fn add(&self, p: &KPoint, q: &KPoint) -> KPoint {
        let (KPoint::Affine { x: x1, y: y1 }, KPoint::Affine { x: x2, y: y2 }) = (p, q) else {
            return if matches!(p, KPoint::Infinity) { q.clone() } else { p.clone() };
        };
        let [a1, a2, a3, a4, _] = self.curve.coeffs();
        let lambda = if x1 == x2 {
            let denom = y1.scalar(2) + self.c(a1) * x1.clone() + self.c(a3);
            if y1 != y2 || denom.is_zero() {
                return KPoint::Infinity;
            }
            let num = x1.clone() * x1.clone() * self.c(&Rational::from_integer(3.into()))
                + self.c(a2) * x1.scalar(2)
                + self.c(a4)
                - self.c(a1) * y1.clone();
            num * denom.inv().expect("nonzero")
        } else {
            (y2.clone() - y1.clone()) * (x2.clone() - x1.clone()).inv().expect("distinct")
        };
        let nu = y1.clone() - lambda.clone() * x1.clone();
        let x3 = lambda.clone() * lambda.clone() + self.c(a1) * lambda.clone() - self.c(a2) - x1.clone() - x2.clone();
        let y3 = -(lambda + self.c(a1)) * x3.clone() - nu - self.c(a3);
        KPoint::Affine { x: x3, y: y3 }
    }

    pub fn sub(&self, p: &KPoint, q: &KPoint) -> KPoint {
        self.add(p, &self.neg(q))
    }

    /// `(R + sR, psi(R - sR))` in `E(Q) x E^d(Q)`.
    pub fn trace_and_twist(&self, p: &KPoint) -> Result<(ECPoint, ECPoint)> {
        let conj = p.conj();
        let plus = self.add(p, &conj).to_rational().ok_or_else(|| {
            Error::ModelInconsistency(format!("trace of {p} is not rational"))
        })?;
        let minus = self.sub(p, &conj);
        let image = match minus {
            KPoint::Infinity => ECPoint::Infinity,
            KPoint::Affine { x, y } => {
                let [a1, _, a3, _, _] = self.curve.coeffs();
                let eta = y.scalar(2) + self.c(a1) * x.clone() + self.c(a3);
                if !x.is_rational() || !eta.a.is_zero() {
                    return Err(Error::ModelInconsistency(format!("{p} - conj is not a twisted point")));
                }
                let d = Rational::from_integer(self.d.clone());
                ECPoint::affine(Rational::from_integer(4.into()) * &d * &x.a, Rational::from_integer(4.into()) * &d * &d * &eta.b)
            }
        };
        self.twist.check_point(&image)?;
        Ok((plus, image))
    }

    /// Canonical height of a point of `E(K)`, normalized so that it agrees with
    /// the height over `Q` on rational points.
    pub fn height<S: Real>(&self, p: &KPoint, prec: Precision) -> Result<S> {
        if let Some(r) = p.to_rational() {
            return canonical_height(&self.curve, &r, prec);
        }
        let (plus, minus) = self.trace_and_twist(p)?;
        let h = canonical_height::<S>(&self.curve, &plus, prec)? + canonical_height::<S>(&self.twist, &minus, prec)?;
        Ok(h / S::from_i64_in(4, prec))
    }

    /// `h(P + Q) - h(P) - h(Q)`.
    pub fn bilinear<S: Real>(&self, p: &KPoint, q: &KPoint, prec: Precision) -> Result<S> {
        let s = self.add(p, q);
        Ok(self.height::<S>(&s, prec)? - self.height::<S>(p, prec)? - self.height::<S>(q, prec)?)
    }
}

/// `E^d: Y^2 = X^3 + d b2 X^2 + 8 d^2 b4 X + 16 d^3 b6`, isomorphic to `E` over
/// `Q(sqrt d)` via `(x, y) -> (4 d x, 4 d^2 w)` where `2y + a1 x + a3 = w sqrt d`.
pub fn twist(e: &WeierstrassCurve, d: &BigInt) -> Result<WeierstrassCurve> {
    let d = Rational::from_integer(d.clone());
    let z = Rational::zero();
    let a2 = &d * e.b2();
    let a4 = Rational::from_integer(8.into()) * &d * &d * e.b4();
    let a6 = Rational::from_integer(16.into()) * &d * &d * &d * e.b6();
    WeierstrassCurve::new(z.clone(), a2, z.clone(), a4, a6)
}

/// `sqrt(q) = c sqrt(d)` with `d` an integer; `None` when `q` is a rational square.
pub fn split_sqrt(q: &Rational) -> Option<(Rational, BigInt)> {
    if q.is_zero() {
        return None;
    }
    let (n, den) = (q.numer().clone(), q.denom().clone());
    let s = den.sqrt();
    let (c, d) = if &s * &s == den { (Rational::new(BigInt::one(), s), n) } else { (Rational::new(BigInt::one(), den.clone()), n * den) };
    if is_square(&d) {
        None
    } else {
        Some((c, d))
    }
}
