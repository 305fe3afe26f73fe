//! Reduction mod p of curves, maps and elliptic curves, for degree estimates.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::poly::Poly;
use crate::elliptic::WeierstrassCurve;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Fp {
    pub v: u64,
    pub p: u64,
}

impl Fp {
    pub fn new(v: u64, p: u64) -> Self {
        Fp { v: v % p, p }
    }

    /// `None` when `q` is not p-integral.
    pub fn from_rational(q: &Rational, p: u64) -> Option<Self> {
        let pb = BigInt::from(p);
        let n = q.numer().mod_floor_pos(&pb);
        let d = q.denom().mod_floor_pos(&pb);
        if d == 0 {
            return None;
        }
        Some(Fp::new(n, p) * Fp::new(d, p).inv()?)
    }

    pub fn is_zero(self) -> bool {
        self.v == 0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp::new(1, self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn inv(self) -> Option<Self> {
        if self.v == 0 {
            None
        } else {
            Some(self.pow(self.p - 2))
        }
    }
}

trait ModFloor {
    fn mod_floor_pos(&self, m: &BigInt) -> u64;
}

impl ModFloor for BigInt {
    fn mod_floor_pos(&self, m: &BigInt) -> u64 {
        let r = ((self % m) + m) % m;
        r.to_u64().expect("residue fits")
    }
}

impl std::ops::Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        Fp::new(self.v + o.v, self.p)
    }
}

impl std::ops::Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        Fp::new(self.v + self.p - o.v, self.p)
    }
}

impl std::ops::Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        Fp { v: ((self.v as u128 * o.v as u128) % self.p as u128) as u64, p: self.p }
    }
}

/// A polynomial with p-integral coefficients reduced mod p.
pub(crate) fn eval_poly(f: &Poly, x: Fp, y: Fp) -> Option<Fp> {
    let p = x.p;
    for (_, c) in f.terms() {
        Fp::from_rational(c, p)?;
    }
    Some(f.eval_in(&x, &y, &|c: &Rational| Fp::from_rational(c, p).unwrap_or(Fp::new(0, p))))
}

/// Reduction of a Weierstrass curve at a prime of good reduction.
#[derive(Clone, Debug)]
pub(crate) struct CurveModP {
    a: [Fp; 5],
}

pub(crate) type PointModP = Option<(u64, u64)>;

impl CurveModP {
    pub fn new(e: &WeierstrassCurve, p: u64) -> Option<Self> {
        let a: Vec<Fp> = e.coeffs().iter().map(|c| Fp::from_rational(c, p)).collect::<Option<_>>()?;
        let disc = Fp::from_rational(e.discriminant(), p)?;
        if disc.is_zero() {
            return None;
        }
        Some(CurveModP { a: [a[0], a[1], a[2], a[3], a[4]] })
    }

    pub fn neg(&self, pt: PointModP) -> PointModP {
        let [a1, _, a3, _, _] = self.a;
        let (x, y) = pt?;
        let (x, y) = (Fp::new(x, a1.p), Fp::new(y, a1.p));
        Some((x.v, (Fp::new(0, x.p) - y - a1 * x - a3).v))
    }

    pub fn add(&self, p1: PointModP, p2: PointModP) -> PointModP {
        let [a1, a2, a3, a4, _] = self.a;
        let p = a1.p;
        let Some((x1, y1)) = p1 else { return p2 };
        let Some((x2, y2)) = p2 else { return p1 };
        let (x1, y1, x2, y2) = (Fp::new(x1, p), Fp::new(y1, p), Fp::new(x2, p), Fp::new(y2, p));
        let lambda = if x1 == x2 {
            let denom = Fp::new(2, p) * y1 + a1 * x1 + a3;
            if y1 != y2 || denom.is_zero() {
                return None;
            }
            (Fp::new(3, p) * x1 * x1 + Fp::new(2, p) * a2 * x1 + a4 - a1 * y1) * denom.inv()?
        } else {
            (y2 - y1) * (x2 - x1).inv()?
        };
        let nu = y1 - lambda * x1;
        let x3 = lambda * lambda + a1 * lambda - a2 - x1 - x2;
        let y3 = Fp::new(0, p) - (lambda + a1) * x3 - nu - a3;
        Some((x3.v, y3.v))
    }

    pub fn mul(&self, n: i64, pt: PointModP) -> PointModP {
        let mut acc = None;
        let mut base = if n < 0 { self.neg(pt) } else { pt };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }
}

/// Largest fiber of `pts -> image` over the affine points where the image is
/// defined; points whose image is undefined mod p are skipped.
pub(crate) fn max_fiber<I>(images: I) -> usize
where
    I: IntoIterator<Item = Option<PointModP>>,
{
    let mut counts: HashMap<PointModP, usize> = HashMap::new();
    for im in images.into_iter().flatten() {
        *counts.entry(im).or_default() += 1;
    }
    counts.values().copied().max().unwrap_or(0)
}

pub(crate) fn is_small_prime(p: u64) -> bool {
    (2..1 << 20).contains(&p) && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_arithmetic() {
        let a = Fp::new(3, 7);
        assert_eq!((a * a.inv().unwrap()).v, 1);
        assert_eq!(Fp::from_rational(&Rational::new(1.into(), 2.into()), 7).unwrap().v, 4);
        assert!(Fp::from_rational(&Rational::new(1.into(), 7.into()), 7).is_none());
        assert_eq!(Fp::from_rational(&Rational::new((-1).into(), 1.into()), 7).unwrap().v, 6);
    }

    #[test]
    fn group_law_mod_p_matches_reduction_of_rational_law() {
        let e = WeierstrassCurve::from_ints(0, 0, 1, -1, 0).unwrap();
        let p = 101;
        let c = CurveModP::new(&e, p).unwrap();
        let pt = Some((0, 0));
        // 5P = (1/4, -5/8) over Q.
        let five = c.mul(5, pt);
        let x = Fp::from_rational(&Rational::new(1.into(), 4.into()), p).unwrap().v;
        let y = Fp::from_rational(&Rational::new((-5).into(), 8.into()), p).unwrap().v;
        assert_eq!(five, Some((x, y)));
        assert_eq!(c.add(pt, c.neg(pt)), None);
        assert!(CurveModP::new(&e, 37).is_none());
    }
}
