//! Global minimal models over Z.
//!
//! Denominators are cleared first, then the scaling exponent at each prime
//! dividing the discriminant is lowered as far as the Kraus conditions allow.
//! The reduced model is rebuilt from `(c4, c6)` with `a1, a3 in {0, 1}` and
//! `a2 in {-1, 0, 1}`, and the change of coordinates onto it is recovered
//! and checked exactly.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::curve::{Isomorphism, WeierstrassCurve};
use crate::arith::{factor, int_valuation};
use crate::error::{Error, Result};
use crate::Rational;

#[derive(Clone, Debug)]
pub struct MinimalModel {
    /// The reduced global minimal model.
    pub curve: WeierstrassCurve,
    /// Coordinates on the input curve mapped onto `curve`.
    pub iso: Isomorphism,
    /// Primes dividing the minimal discriminant, ascending.
    pub bad_primes: Vec<BigUint>,
}

impl MinimalModel {
    pub fn compute(e: &WeierstrassCurve, bound: u64) -> Result<Self> {
        let (integral, iso0) = clear_denominators(e)?;
        let c4 = integral.c4().numer().clone();
        let c6 = integral.c6().numer().clone();
        let disc = integral.discriminant().numer().clone();
        let factors = factor(disc.magnitude(), bound)?;

        let mut u_rest = BigInt::one();
        let mut small: Vec<(BigInt, i64)> = Vec::new();
        for (p, _) in &factors {
            let d = max_scaling(&c4, &c6, &disc, p);
            let pi = BigInt::from(p.clone());
            if *p == BigUint::from(2u32) || *p == BigUint::from(3u32) {
                small.push((pi, d));
            } else if d > 0 {
                u_rest *= pi.pow(d as u32);
            }
        }

        let (u, coeffs) = search_small_primes(&c4, &c6, &u_rest, &small)
            .ok_or_else(|| Error::ModelInconsistency("no integral model for the reduced invariants".into()))?;
        let target = WeierstrassCurve::from_coeffs(&coeffs.map(Rational::from_integer))?;
        let iso1 = recover_transform(&integral, &target, &u)?;
        let iso = iso0.then(&iso1);

        let min_disc = target.discriminant().numer().clone();
        let bad_primes = factors
            .into_iter()
            .map(|(p, _)| p)
            .filter(|p| int_valuation(&min_disc, p) > 0)
            .collect();
        Ok(MinimalModel { curve: target, iso, bad_primes })
    }

    pub fn is_trivial(&self) -> bool {
        self.iso == Isomorphism::identity()
    }
}

fn clear_denominators(e: &WeierstrassCurve) -> Result<(WeierstrassCurve, Isomorphism)> {
    let l = e.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    if l.is_one() {
        return Ok((e.clone(), Isomorphism::identity()));
    }
    // x = x'/l^2 scales a_i by l^i.
    let iso = Isomorphism::new(
        Rational::new(BigInt::one(), l),
        Rational::zero(),
        Rational::zero(),
        Rational::zero(),
    )?;
    let f = iso.apply_curve(e)?;
    debug_assert!(f.is_integral());
    Ok((f, iso))
}

fn max_scaling(c4: &BigInt, c6: &BigInt, disc: &BigInt, p: &BigUint) -> i64 {
    let mut d = int_valuation(disc, p) / 12;
    if !c4.is_zero() {
        d = d.min(int_valuation(c4, p) / 4);
    }
    if !c6.is_zero() {
        d = d.min(int_valuation(c6, p) / 6);
    }
    d
}

fn search_small_primes(
    c4: &BigInt,
    c6: &BigInt,
    u_rest: &BigInt,
    small: &[(BigInt, i64)],
) -> Option<(BigInt, [BigInt; 5])> {
    let lookup = |q: i64| small.iter().find(|(p, _)| *p == BigInt::from(q)).map(|(_, d)| *d).unwrap_or(0);
    let (d2max, d3max) = (lookup(2), lookup(3));
    for d2 in (0..=d2max).rev() {
        for d3 in (0..=d3max).rev() {
            let u = u_rest * BigInt::from(2).pow(d2 as u32) * BigInt::from(3).pow(d3 as u32);
            let u4 = u.pow(4);
            let u6 = u.pow(6);
            if !(c4 % &u4).is_zero() || !(c6 % &u6).is_zero() {
                continue;
            }
            if let Some(a) = model_from_invariants(&(c4 / &u4), &(c6 / &u6)) {
                return Some((u, a));
            }
        }
    }
    None
}

/// Integral model with the given `c4, c6`, if one exists.
pub(crate) fn model_from_invariants(c4: &BigInt, c6: &BigInt) -> Option<[BigInt; 5]> {
    let exact = |n: BigInt, d: i64| -> Option<BigInt> {
        let (q, r) = n.div_rem(&BigInt::from(d));
        r.is_zero().then_some(q)
    };
    let mut b2 = (-c6).mod_floor(&BigInt::from(12));
    if b2 > BigInt::from(6) {
        b2 -= 12;
    }
    let b4 = exact(&b2 * &b2 - c4, 24)?;
    let b6 = exact(-(&b2 * &b2 * &b2) + BigInt::from(36) * &b2 * &b4 - c6, 216)?;
    let a1 = b2.mod_floor(&BigInt::from(2));
    let a3 = b6.mod_floor(&BigInt::from(2));
    let a2 = exact(&b2 - &a1, 4)?;
    let a4 = exact(&b4 - &a1 * &a3, 2)?;
    let a6 = exact(&b6 - &a3, 4)?;
    Some([a1, a2, a3, a4, a6])
}

fn recover_transform(from: &WeierstrassCurve, to: &WeierstrassCurve, u: &BigInt) -> Result<Isomorphism> {
    let [a1, a2, a3, _, _] = from.coeffs();
    let [b1, b2, b3, _, _] = to.coeffs();
    for sign in [1, -1] {
        let u = Rational::from_integer(u * sign);
        let two = Rational::from_integer(2.into());
        let three = Rational::from_integer(3.into());
        let s = (&u * b1 - a1) / &two;
        let r = (&u * &u * b2 - a2 + &s * a1 + &s * &s) / &three;
        let t = (&u * &u * &u * b3 - a3 - &r * a1) / &two;
        let iso = Isomorphism::new(u, r, s, t)?;
        if iso.apply_curve(from)? == *to {
            return Ok(iso);
        }
    }
    Err(Error::ModelInconsistency(format!("no isomorphism from {from} to {to}")))
}

/// Whether `e` is integral and minimal at every prime.
pub fn is_globally_minimal(e: &WeierstrassCurve) -> Result<bool> {
    if !e.is_integral() {
        return Ok(false);
    }
    let m = e.minimal_model()?;
    Ok(m.curve.discriminant().abs() == e.discriminant().abs())
}
