use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::minimal::MinimalModel;
use super::point::ECPoint;
use super::torsion::TorsionSubgroup;
use crate::arith::format_rational;
use crate::error::{Error, Result};
use crate::Rational;

/// Long Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
///
/// All derived invariants are computed once at construction. The minimal
/// model and the torsion subgroup are computed lazily and cached.
#[derive(Clone)]
pub struct WeierstrassCurve {
    a: [Rational; 5],
    b2: Rational,
    b4: Rational,
    b6: Rational,
    b8: Rational,
    c4: Rational,
    c6: Rational,
    disc: Rational,
    j: Rational,
    minimal: OnceLock<Result<Arc<MinimalModel>>>,
    torsion: OnceLock<Result<Arc<TorsionSubgroup>>>,
}

impl WeierstrassCurve {
    pub fn new(a1: Rational, a2: Rational, a3: Rational, a4: Rational, a6: Rational) -> Result<Self> {
        let b2 = &a1 * &a1 + Rational::from_integer(4.into()) * &a2;
        let b4 = Rational::from_integer(2.into()) * &a4 + &a1 * &a3;
        let b6 = &a3 * &a3 + Rational::from_integer(4.into()) * &a6;
        let b8 = &a1 * &a1 * &a6 + Rational::from_integer(4.into()) * &a2 * &a6 - &a1 * &a3 * &a4
            + &a2 * &a3 * &a3
            - &a4 * &a4;
        let c4 = &b2 * &b2 - int(24) * &b4;
        let c6 = -(&b2 * &b2 * &b2) + int(36) * &b2 * &b4 - int(216) * &b6;
        let disc = -(&b2 * &b2 * &b8) - int(8) * &b4 * &b4 * &b4 - int(27) * &b6 * &b6
            + int(9) * &b2 * &b4 * &b6;
        if disc.is_zero() {
            return Err(Error::SingularCurve);
        }
        let j = &c4 * &c4 * &c4 / &disc;
        Ok(WeierstrassCurve {
            a: [a1, a2, a3, a4, a6],
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            disc,
            j,
            minimal: OnceLock::new(),
            torsion: OnceLock::new(),
        })
    }

    pub fn from_ints(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Result<Self> {
        Self::new(int(a1), int(a2), int(a3), int(a4), int(a6))
    }

    pub fn from_coeffs(a: &[Rational; 5]) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = a.clone();
        Self::new(a1, a2, a3, a4, a6)
    }

    pub fn a1(&self) -> &Rational {
        &self.a[0]
    }
    pub fn a2(&self) -> &Rational {
        &self.a[1]
    }
    pub fn a3(&self) -> &Rational {
        &self.a[2]
    }
    pub fn a4(&self) -> &Rational {
        &self.a[3]
    }
    pub fn a6(&self) -> &Rational {
        &self.a[4]
    }
    /// `[a1, a2, a3, a4, a6]`.
    pub fn coeffs(&self) -> &[Rational; 5] {
        &self.a
    }
    pub fn b2(&self) -> &Rational {
        &self.b2
    }
    pub fn b4(&self) -> &Rational {
        &self.b4
    }
    pub fn b6(&self) -> &Rational {
        &self.b6
    }
    pub fn b8(&self) -> &Rational {
        &self.b8
    }
    pub fn c4(&self) -> &Rational {
        &self.c4
    }
    pub fn c6(&self) -> &Rational {
        &self.c6
    }
    pub fn discriminant(&self) -> &Rational {
        &self.disc
    }
    pub fn j_invariant(&self) -> &Rational {
        &self.j
    }

    pub fn is_integral(&self) -> bool {
        self.a.iter().all(|c| c.is_integer())
    }

    /// Left side minus right side of the Weierstrass equation at `(x, y)`.
    pub fn equation_at(&self, x: &Rational, y: &Rational) -> Rational {
        let [a1, a2, a3, a4, a6] = &self.a;
        y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)
    }

    pub fn contains(&self, p: &ECPoint) -> bool {
        match p {
            ECPoint::Infinity => true,
            ECPoint::Affine { x, y } => self.equation_at(x, y).is_zero(),
        }
    }

    pub fn check_point(&self, p: &ECPoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::NotOnCurve)
        }
    }

    /// Global minimal model together with the isomorphism onto it, cached.
    pub fn minimal_model(&self) -> Result<Arc<MinimalModel>> {
        self.minimal
            .get_or_init(|| MinimalModel::compute(self, crate::arith::DEFAULT_FACTOR_BOUND).map(Arc::new))
            .clone()
    }

    /// Rational torsion subgroup, cached.
    pub fn torsion_subgroup(&self) -> Result<Arc<TorsionSubgroup>> {
        self.torsion
            .get_or_init(|| TorsionSubgroup::compute(self).map(Arc::new))
            .clone()
    }

    pub fn is_torsion(&self, p: &ECPoint) -> Result<bool> {
        Ok(self.torsion_subgroup()?.contains(p))
    }
}

impl PartialEq for WeierstrassCurve {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
    }
}

impl Eq for WeierstrassCurve {}

impl fmt::Debug for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(format_rational).collect();
        write!(f, "WeierstrassCurve[{}]", parts.join(","))
    }
}

impl fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(format_rational).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub(crate) fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Change of coordinates `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub u: Rational,
    pub r: Rational,
    pub s: Rational,
    pub t: Rational,
}

impl Isomorphism {
    pub fn identity() -> Self {
        Isomorphism { u: Rational::one(), r: Rational::zero(), s: Rational::zero(), t: Rational::zero() }
    }

    pub fn new(u: Rational, r: Rational, s: Rational, t: Rational) -> Result<Self> {
        if u.is_zero() {
            return Err(Error::Input("isomorphism with u = 0".into()));
        }
        Ok(Isomorphism { u, r, s, t })
    }

    /// The curve in the new coordinates.
    pub fn apply_curve(&self, e: &WeierstrassCurve) -> Result<WeierstrassCurve> {
        let Isomorphism { u, r, s, t } = self;
        let [a1, a2, a3, a4, a6] = e.coeffs();
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        let na1 = (a1 + int(2) * s) / u;
        let na2 = (a2 - s * a1 + int(3) * r - s * s) / &u2;
        let na3 = (a3 + r * a1 + int(2) * t) / &u3;
        let na4 = (a4 - s * a3 + int(2) * r * a2 - (t + r * s) * a1 + int(3) * r * r - int(2) * s * t) / &u4;
        let na6 = (a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1) / &u6;
        WeierstrassCurve::new(na1, na2, na3, na4, na6)
    }

    /// Image in the new coordinates of a point given in the old ones.
    pub fn map_point(&self, p: &ECPoint) -> ECPoint {
        match p {
            ECPoint::Infinity => ECPoint::Infinity,
            ECPoint::Affine { x, y } => {
                let Isomorphism { u, r, s, t } = self;
                let dx = x - r;
                let nx = &dx / (u * u);
                let ny = (y - s * &dx - t) / (u * u * u);
                ECPoint::Affine { x: nx, y: ny }
            }
        }
    }

    /// Old coordinates of a point given in the new ones.
    pub fn pull_point(&self, p: &ECPoint) -> ECPoint {
        match p {
            ECPoint::Infinity => ECPoint::Infinity,
            ECPoint::Affine { x, y } => {
                let Isomorphism { u, r, s, t } = self;
                let u2 = u * u;
                let ox = &u2 * x + r;
                let oy = &u2 * u * y + s * &u2 * x + t;
                ECPoint::Affine { x: ox, y: oy }
            }
        }
    }

    /// First `self`, then `next`.
    pub fn then(&self, next: &Isomorphism) -> Isomorphism {
        let (u1, r1, s1, t1) = (&self.u, &self.r, &self.s, &self.t);
        let (u2, r2, s2, t2) = (&next.u, &next.r, &next.s, &next.t);
        Isomorphism {
            u: u1 * u2,
            r: u1 * u1 * r2 + r1,
            s: u1 * s2 + s1,
            t: u1 * u1 * u1 * t2 + s1 * u1 * u1 * r2 + t1,
        }
    }

    pub fn inverse(&self) -> Isomorphism {
        let Isomorphism { u, r, s, t } = self;
        Isomorphism {
            u: Rational::one() / u,
            r: -r / (u * u),
            s: -s / u,
            t: (r * s - t) / (u * u * u),
        }
    }

    pub fn is_unimodular_integral(&self) -> bool {
        (self.u == Rational::one() || self.u == -Rational::one())
            && self.r.is_integer()
            && self.s.is_integer()
            && self.t.is_integer()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn invariants_of_37a1() {
        let e = WeierstrassCurve::from_ints(0, 0, 1, -1, 0).unwrap();
        assert_eq!(e.discriminant(), &int(37));
        assert_eq!(e.c4(), &int(48));
        assert_eq!(e.c6(), &int(-216));
        assert_eq!(e.j_invariant(), &q(110592, 37));
    }

    #[test]
    fn standard_relations_hold() {
        for a in [[1, -1, 1, -3, 5], [0, 1, 0, -7, 6], [1, 0, 1, 4, -6], [0, 0, 0, -1, 0]] {
            let e = WeierstrassCurve::from_ints(a[0], a[1], a[2], a[3], a[4]).unwrap();
            assert_eq!(int(1728) * e.discriminant(), e.c4() * e.c4() * e.c4() - e.c6() * e.c6());
            assert_eq!(int(4) * e.b8(), e.b2() * e.b6() - e.b4() * e.b4());
        }
    }

    #[test]
    fn singular_curve_rejected() {
        assert_eq!(WeierstrassCurve::from_ints(0, 0, 0, 0, 0).unwrap_err(), Error::SingularCurve);
        assert_eq!(WeierstrassCurve::from_ints(0, 0, 0, -3, 2).unwrap_err(), Error::SingularCurve);
    }

    #[test]
    fn isomorphism_round_trip() {
        let e = WeierstrassCurve::from_ints(0, 0, 1, -1, 0).unwrap();
        let iso = Isomorphism::new(q(2, 3), q(1, 2), int(-1), q(5, 7)).unwrap();
        let f = iso.apply_curve(&e).unwrap();
        assert_eq!(f.j_invariant(), e.j_invariant());
        let back = iso.inverse().apply_curve(&f).unwrap();
        assert_eq!(back, e);
        let composed = iso.then(&iso.inverse());
        assert_eq!(composed.apply_curve(&e).unwrap(), e);
        let p = ECPoint::affine(int(1), int(-1));
        assert!(e.contains(&p));
        let p2 = iso.map_point(&p);
        assert!(f.contains(&p2));
        assert_eq!(iso.pull_point(&p2), p);
        let chain = iso.then(&Isomorphism::new(int(3), int(2), int(1), int(0)).unwrap());
        let g = chain.apply_curve(&e).unwrap();
        assert!(g.contains(&chain.map_point(&p)));
    }
}
