//! The G_m-torsor `M^x` of a rigidified symmetric bundle `M = O(d (O))`.
//!
//! A point of `M^x` over `P != O` is written `(P, t)` with `t` the fiber
//! coordinate relative to the fixed section with divisor `d (O)`. Its local
//! height is `(d/2) lambda_v(P) - log|t|_v`; the product formula makes the
//! global sum independent of `t`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::arith::{factor, place_log_norm, valuation_vector, Place, ValuationVector};
use crate::elliptic::{ECPoint, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::heights::{local_height_arch, local_heights, local_height_nonarch};
use crate::mordell_weil::{Augmentation, MWBasis};
use crate::scalar::{Precision, Real};
use crate::Rational;

/// `O(d (O))` with its canonical rigidification.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidifiedBundle {
    pub curve: WeierstrassCurve,
    pub degree: u32,
}

impl RigidifiedBundle {
    pub fn new(curve: WeierstrassCurve, degree: u32) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Input("bundle degree must be at least 1".into()));
        }
        Ok(RigidifiedBundle { curve, degree })
    }

    fn half_degree<S: Real>(&self, prec: Precision) -> S {
        S::from_rational_in(&Rational::new(self.degree.into(), 2u32.into()), prec)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorsorPoint {
    base: ECPoint,
    fiber: Rational,
}

impl TorsorPoint {
    pub fn new(base: ECPoint, fiber: Rational) -> Result<Self> {
        if base.is_infinity() {
            return Err(Error::Domain("the origin lies on the section divisor".into()));
        }
        if fiber.is_zero() {
            return Err(Error::Domain("fiber coordinate must be nonzero".into()));
        }
        Ok(TorsorPoint { base, fiber })
    }

    pub fn base(&self) -> &ECPoint {
        &self.base
    }

    pub fn fiber(&self) -> &Rational {
        &self.fiber
    }

    /// `(P, kappa t)`.
    pub fn rescale(&self, kappa: &Rational) -> Result<Self> {
        TorsorPoint::new(self.base.clone(), &self.fiber * kappa)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorsorAugmentation {
    pub base_aug: Augmentation,
    pub fiber_class: ValuationVector,
}

/// `(d/2) lambda_v(P) - log|t|_v`.
pub fn torsor_local_height<S: Real>(bundle: &RigidifiedBundle, pt: &TorsorPoint, v: &Place, prec: Precision) -> Result<S> {
    let lambda = match v {
        Place::Archimedean => local_height_arch::<S>(&bundle.curve, &pt.base, prec)?.value,
        Place::Finite(p) => local_height_nonarch::<S>(&bundle.curve, &pt.base, p, prec)?.value,
    };
    Ok(bundle.half_degree::<S>(prec) * lambda - place_log_norm::<S>(&pt.fiber, v, prec)?)
}

/// Places where the local height can be nonzero.
pub fn contributing_places(bundle: &RigidifiedBundle, pt: &TorsorPoint, factor_bound: u64) -> Result<Vec<Place>> {
    let mut primes: Vec<BigUint> = Vec::new();
    let mut push = |p: BigUint| {
        if !primes.contains(&p) {
            primes.push(p);
        }
    };
    let m = bundle.curve.minimal_model()?;
    m.bad_primes.iter().cloned().for_each(&mut push);
    if let Some(x) = m.iso.map_point(&pt.base).x() {
        factor(x.denom().magnitude(), factor_bound)?.into_iter().for_each(|(p, _)| push(p));
    }
    for n in [pt.fiber.numer().magnitude(), pt.fiber.denom().magnitude()] {
        factor(n, factor_bound)?.into_iter().for_each(|(p, _)| push(p));
    }
    primes.sort();
    Ok(std::iter::once(Place::Archimedean).chain(primes.into_iter().map(Place::Finite)).collect())
}

/// Sum of the local heights over all places; equals `(d/2) h(P)` for every `t`.
pub fn torsor_global_height<S: Real>(bundle: &RigidifiedBundle, pt: &TorsorPoint, prec: Precision) -> Result<S> {
    bundle.curve.check_point(&pt.base)?;
    let half = bundle.half_degree::<S>(prec);
    let mut total = S::zero();
    for l in local_heights::<S>(&bundle.curve, &pt.base, prec)? {
        total = total + half.clone() * l.value;
    }
    let fiber_places = std::iter::once(Place::Archimedean).chain(
        valuation_vector(&pt.fiber, crate::arith::DEFAULT_FACTOR_BOUND)?.entries().map(|(p, _)| Place::Finite(p.clone())).collect::<Vec<_>>(),
    );
    for v in fiber_places {
        total = total - place_log_norm::<S>(&pt.fiber, &v, prec)?;
    }
    Ok(total)
}

/// `(P1, t1) (x) (P2, t2) = (P, t1 t2)` on `O((d1 + d2)(O))`.
pub fn tensor_points(
    b1: &RigidifiedBundle,
    p1: &TorsorPoint,
    b2: &RigidifiedBundle,
    p2: &TorsorPoint,
) -> Result<(RigidifiedBundle, TorsorPoint)> {
    if b1.curve != b2.curve {
        return Err(Error::Input("bundles live on different curves".into()));
    }
    if p1.base != p2.base {
        return Err(Error::Input("torsor points lie over different base points".into()));
    }
    let bundle = RigidifiedBundle::new(b1.curve.clone(), b1.degree + b2.degree)?;
    Ok((bundle, TorsorPoint::new(p1.base.clone(), &p1.fiber * &p2.fiber)?))
}

/// Coordinates of the base over `basis` and the class of `t` in `Q^x (x) Q`.
pub fn augment_torsor_point<S: Real>(
    bundle: &RigidifiedBundle,
    pt: &TorsorPoint,
    basis: &MWBasis<S>,
    factor_bound: u64,
) -> Result<TorsorAugmentation> {
    bundle.curve.check_point(&pt.base)?;
    Ok(TorsorAugmentation { base_aug: basis.decompose(&pt.base)?, fiber_class: valuation_vector(&pt.fiber, factor_bound)? })
}

/// The action of `Q^x (x) Q` on the fiber.
pub fn fiber_act(aug: &TorsorAugmentation, c: &ValuationVector) -> TorsorAugmentation {
    TorsorAugmentation { base_aug: aug.base_aug.clone(), fiber_class: &aug.fiber_class + c }
}

/// The unique `c` with `fiber_act(a, c) = b`, when `a` and `b` share a base.
pub fn fiber_difference(a: &TorsorAugmentation, b: &TorsorAugmentation) -> Result<ValuationVector> {
    if a.base_aug != b.base_aug {
        return Err(Error::Input("augmentations lie over different base augmentations".into()));
    }
    Ok(&b.fiber_class - &a.fiber_class)
}

/// `t = 1`.
pub fn unit_fiber(base: ECPoint) -> Result<TorsorPoint> {
    TorsorPoint::new(base, Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DEFAULT_FACTOR_BOUND;
    use crate::corpus;
    use crate::heights::canonical_height;
    use crate::Float;
    use proptest::prelude::*;

    const P50: Precision = Precision(50);

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn e37() -> (RigidifiedBundle, ECPoint) {
        let c = corpus::curve("37a1");
        (RigidifiedBundle::new(c.curve, 2).unwrap(), c.generators[0].clone())
    }

    fn close(a: &Float, b: &Float, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol
    }

    #[test]
    fn construction_rules() {
        let (b, p) = e37();
        assert!(RigidifiedBundle::new(b.curve.clone(), 0).is_err());
        assert!(matches!(TorsorPoint::new(ECPoint::Infinity, q(1, 1)), Err(Error::Domain(_))));
        assert!(matches!(TorsorPoint::new(p, q(0, 1)), Err(Error::Domain(_))));
    }

    #[test]
    fn local_heights_with_unit_fiber_and_rescaling() {
        let (b, p) = e37();
        let pt = unit_fiber(p.clone()).unwrap();
        for v in [Place::Archimedean, Place::Finite(37u32.into()), Place::Finite(2u32.into())] {
            let lambda = match &v {
                Place::Archimedean => local_height_arch::<Float>(&b.curve, &p, P50).unwrap().value,
                Place::Finite(pr) => local_height_nonarch::<Float>(&b.curve, &p, pr, P50).unwrap().value,
            };
            let t1 = torsor_local_height::<Float>(&b, &pt, &v, P50).unwrap();
            assert!(close(&t1, &lambda, 1e-50));
            let kappa = q(-12, 37);
            let t2 = torsor_local_height::<Float>(&b, &pt.rescale(&kappa).unwrap(), &v, P50).unwrap();
            let log_norm = place_log_norm::<Float>(&kappa, &v, P50).unwrap();
            assert!(close(&(t2 - t1), &(-log_norm), 1e-50));
        }
    }

    #[test]
    fn global_height_ignores_the_fiber() {
        let (b, p) = e37();
        let h = canonical_height::<Float>(&b.curve, &p, P50).unwrap();
        for t in [q(1, 1), q(6, 1), q(-35, 121), q(1, 1024)] {
            let pt = TorsorPoint::new(p.clone(), t).unwrap();
            let g = torsor_global_height::<Float>(&b, &pt, P50).unwrap();
            assert!(close(&g, &h, 1e-45), "{g}");
            // The same total by summing torsor_local_height over the contributing places.
            let places = contributing_places(&b, &pt, DEFAULT_FACTOR_BOUND).unwrap();
            let s = places.iter().fold(Float::zero(), |acc, v| acc + torsor_local_height::<Float>(&b, &pt, v, P50).unwrap());
            assert!(close(&s, &h, 1e-45));
        }
        let b6 = RigidifiedBundle::new(b.curve.clone(), 6).unwrap();
        let g = torsor_global_height::<Float>(&b6, &TorsorPoint::new(p, q(7, 5)).unwrap(), P50).unwrap();
        assert!(close(&g, &(Float::from_int(3, 200) * h), 1e-44));
    }

    #[test]
    fn torsion_base_has_zero_height() {
        let e = WeierstrassCurve::from_ints(0, 0, 0, 0, 1).unwrap();
        let b = RigidifiedBundle::new(e, 2).unwrap();
        for (x, y) in [(2, 3), (0, 1), (-1, 0)] {
            let pt = TorsorPoint::new(ECPoint::affine(q(x, 1), q(y, 1)), q(10, 3)).unwrap();
            assert!(torsor_global_height::<Float>(&b, &pt, P50).unwrap().abs().to_f64() < 1e-45);
        }
    }

    #[test]
    fn tensor_products() {
        let (b, p) = e37();
        let (b4, t) = tensor_points(&b, &unit_fiber(p.clone()).unwrap(), &b, &unit_fiber(p.clone()).unwrap()).unwrap();
        assert_eq!(b4.degree, 4);
        assert_eq!(t.fiber(), &q(1, 1));
        let p2 = TorsorPoint::new(p.clone(), q(2, 1)).unwrap();
        let p3 = TorsorPoint::new(p.clone(), q(3, 1)).unwrap();
        let b3 = RigidifiedBundle::new(b.curve.clone(), 3).unwrap();
        let (b5, t6) = tensor_points(&b, &p2, &b3, &p3).unwrap();
        assert_eq!(t6.fiber(), &q(6, 1));
        for v in [Place::Archimedean, Place::Finite(2u32.into()), Place::Finite(3u32.into()), Place::Finite(37u32.into())] {
            let lhs = torsor_local_height::<Float>(&b5, &t6, &v, P50).unwrap();
            let rhs = torsor_local_height::<Float>(&b, &p2, &v, P50).unwrap() + torsor_local_height::<Float>(&b3, &p3, &v, P50).unwrap();
            assert!(close(&lhs, &rhs, 1e-48));
        }
        let other = TorsorPoint::new(b.curve.double(&p).unwrap(), q(1, 1)).unwrap();
        assert!(tensor_points(&b, &p2, &b, &other).is_err());
    }

    #[test]
    fn augmentations_and_fiber_action() {
        let (b, p) = e37();
        let basis = MWBasis::<Float>::new(b.curve.clone(), vec![p.clone()], P50).unwrap();
        let a = augment_torsor_point(&b, &TorsorPoint::new(p.clone(), q(12, 1)).unwrap(), &basis, DEFAULT_FACTOR_BOUND).unwrap();
        assert_eq!(a.base_aug, Augmentation::unit(1, 0));
        let want = ValuationVector::from_entries([(BigUint::from(2u32), q(2, 1)), (BigUint::from(3u32), q(1, 1))]).unwrap();
        assert_eq!(a.fiber_class, want);
        let neg = augment_torsor_point(&b, &TorsorPoint::new(p.clone(), q(-12, 1)).unwrap(), &basis, DEFAULT_FACTOR_BOUND).unwrap();
        assert_eq!(neg, a);

        let e = WeierstrassCurve::from_ints(0, 0, 0, 0, 1).unwrap();
        let tb = RigidifiedBundle::new(e.clone(), 2).unwrap();
        let basis0 = MWBasis::<Float>::new(e, vec![], P50).unwrap();
        let t = augment_torsor_point(&tb, &unit_fiber(ECPoint::affine(q(2, 1), q(3, 1))).unwrap(), &basis0, DEFAULT_FACTOR_BOUND).unwrap();
        assert!(t.base_aug.is_zero() && t.fiber_class.is_zero());

        assert_eq!(fiber_act(&a, &ValuationVector::new()), a);
        let c = ValuationVector::from_entries([(BigUint::from(5u32), q(-1, 3))]).unwrap();
        assert_eq!(fiber_act(&fiber_act(&a, &c), &(-&c)), a);
        let moved = fiber_act(&a, &c);
        assert_eq!(fiber_difference(&a, &moved).unwrap(), c);
        let other_base = TorsorAugmentation { base_aug: Augmentation::zero(1), fiber_class: ValuationVector::new() };
        assert!(fiber_difference(&a, &other_base).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn lift_independence(num in 1i64..=10_000, den in 1i64..=10_000, neg in any::<bool>(), k in 1i64..=4) {
            let c = corpus::curve("389a1");
            let b = RigidifiedBundle::new(c.curve.clone(), 2).unwrap();
            let p = c.curve.scalar_mul(k, &c.generators[0]).unwrap();
            let base = unit_fiber(p.clone()).unwrap();
            let kappa = q(if neg { -num } else { num }, den);
            let g0 = torsor_global_height::<Float>(&b, &base, P50).unwrap();
            let g1 = torsor_global_height::<Float>(&b, &base.rescale(&kappa).unwrap(), P50).unwrap();
            prop_assert!(close(&g0, &g1, 1e-45));
        }

        #[test]
        fn augmentation_is_equivariant(num in 1i64..=500, den in 1i64..=500) {
            let (b, p) = e37();
            let basis = MWBasis::<Float>::new(b.curve.clone(), vec![p.clone()], P50).unwrap();
            let pt = TorsorPoint::new(p, q(6, 5)).unwrap();
            let kappa = q(num, den);
            let a = augment_torsor_point(&b, &pt, &basis, DEFAULT_FACTOR_BOUND).unwrap();
            let lhs = fiber_act(&a, &valuation_vector(&kappa, DEFAULT_FACTOR_BOUND).unwrap());
            let rhs = augment_torsor_point(&b, &pt.rescale(&kappa).unwrap(), &basis, DEFAULT_FACTOR_BOUND).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
