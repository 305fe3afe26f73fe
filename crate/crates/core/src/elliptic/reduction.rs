use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::curve::WeierstrassCurve;
use crate::arith::{int_valuation, is_prime};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReductionType {
    Good,
    Multiplicative { split: bool },
    Additive,
}

impl ReductionType {
    pub fn label(&self) -> &'static str {
        match self {
            ReductionType::Good => "good",
            ReductionType::Multiplicative { split: true } => "split multiplicative",
            ReductionType::Multiplicative { split: false } => "nonsplit multiplicative",
            ReductionType::Additive => "additive",
        }
    }
}

/// Reduction data at one prime, read off a globally minimal model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionInfo {
    pub prime: BigUint,
    pub v_disc: i64,
    /// `None` when `c4 = 0`.
    pub v_c4: Option<i64>,
    pub kind: ReductionType,
}

impl WeierstrassCurve {
    /// Good, multiplicative or additive reduction at `p`, computed on the
    /// global minimal model.
    pub fn reduction_data(&self, p: &BigUint) -> Result<ReductionInfo> {
        if !is_prime(p) {
            return Err(Error::Input(format!("{p} is not prime")));
        }
        let m = self.minimal_model()?;
        Ok(classify(&m.curve, p))
    }
}

/// Classification on a model assumed minimal at `p`.
pub(crate) fn classify(e: &WeierstrassCurve, p: &BigUint) -> ReductionInfo {
    let disc = e.discriminant().numer();
    let c4 = e.c4().numer();
    let v_disc = int_valuation(disc, p);
    let v_c4 = (!c4.is_zero()).then(|| int_valuation(c4, p));
    let kind = if v_disc == 0 {
        ReductionType::Good
    } else if v_c4 == Some(0) {
        ReductionType::Multiplicative { split: is_split(e, p) }
    } else {
        ReductionType::Additive
    };
    ReductionInfo { prime: p.clone(), v_disc, v_c4, kind }
}

/// Split test for a node: the tangent directions `T^2 + a1 T - (a2 + 3 x0)`
/// at the singular point `(x0, y0)` are rational mod p.
fn is_split(e: &WeierstrassCurve, p: &BigUint) -> bool {
    let pi = BigInt::from(p.clone());
    let a: Vec<BigInt> = e.coeffs().iter().map(|c| c.numer().clone()).collect();
    let x0 = singular_x(e, &pi);
    let c = -(&a[1] + BigInt::from(3) * &x0);
    if pi == BigInt::from(2) {
        let at = |t: i64| (BigInt::from(t * t) + &a[0] * t + &c).mod_floor(&pi).is_zero();
        return at(0) || at(1);
    }
    let disc = (&a[0] * &a[0] - BigInt::from(4) * &c).mod_floor(&pi);
    let exp = (&pi - BigInt::one()) / BigInt::from(2);
    disc.modpow(&exp, &pi).is_one()
}

fn singular_x(e: &WeierstrassCurve, p: &BigInt) -> BigInt {
    let a: Vec<BigInt> = e.coeffs().iter().map(|c| c.numer().clone()).collect();
    if *p > BigInt::from(3) {
        // Node of y^2 = x^3 - 27 c4 x - 54 c6 sits at x = -3B / (2A).
        let big_a = BigInt::from(-27) * e.c4().numer();
        let big_b = BigInt::from(-54) * e.c6().numer();
        let xs = (BigInt::from(-3) * big_b * inverse_mod(&(BigInt::from(2) * big_a), p)).mod_floor(p);
        let b2 = e.b2().numer();
        return ((xs - BigInt::from(3) * b2) * inverse_mod(&BigInt::from(36), p)).mod_floor(p);
    }
    let small = if *p == BigInt::from(2) { 2 } else { 3 };
    for x in 0..small {
        for y in 0..small {
            let (x, y) = (BigInt::from(x), BigInt::from(y));
            let f = &y * &y + &a[0] * &x * &y + &a[2] * &y
                - (&x * &x * &x + &a[1] * &x * &x + &a[3] * &x + &a[4]);
            let fx = BigInt::from(3) * &x * &x + BigInt::from(2) * &a[1] * &x + &a[3] - &a[0] * &y;
            let fy = BigInt::from(2) * &y + &a[0] * &x + &a[2];
            if [f, fx, fy].iter().all(|v| v.mod_floor(p).is_zero()) {
                return x;
            }
        }
    }
    unreachable!("reduction is singular at p")
}

fn inverse_mod(a: &BigInt, p: &BigInt) -> BigInt {
    let e = a.extended_gcd(p);
    e.x.mod_floor(p)
}
