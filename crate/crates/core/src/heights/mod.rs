//! Canonical heights and their local decomposition.
//!
//! Normalization: `h_hat(P) = lim 4^-n h_x(2^n P)` with
//! `h_x(P) = log max(|num x(P)|, den x(P))`, the height attached to the
//! degree-2 bundle `O(2(O))`. Local heights are the rigidified ones, with
//! `lambda_v(P) - log max(1, |x(P)|_v) -> 0` as `P -> O`, evaluated on the
//! global minimal model. They sum to `h_hat` with no discriminant term to
//! redistribute.
//!
//! Two independent routes are provided: the doubling limit, evaluated place
//! by place with a certified tail, and the sum of closed-form local heights.

mod arch;
mod doubling;
mod nonarch;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{factor, ln_integer, Place, DEFAULT_FACTOR_BOUND};
use crate::elliptic::{ECPoint, MinimalModel, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real, GUARD_DIGITS};
use crate::Rational;

pub use doubling::MAX_MODULUS_BITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeightMethod {
    DoublingLimit,
    LocalSum,
}

impl HeightMethod {
    pub fn label(&self) -> &'static str {
        match self {
            HeightMethod::DoublingLimit => "doubling-limit",
            HeightMethod::LocalSum => "local-sum",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CanonicalHeightValue<S> {
    pub value: S,
    pub method: HeightMethod,
    pub precision: Precision,
}

/// `lambda_v(P)`; at finite places `value = exact_part * log p`.
#[derive(Clone, Debug)]
pub struct LocalHeightValue<S> {
    pub place: Place,
    pub value: S,
    pub exact_part: Option<Rational>,
}

/// Digits the series and tail bounds aim for.
fn target_digits<S: Real>(prec: Precision) -> u32 {
    match S::digit_capacity() {
        Some(cap) => cap + 2,
        None => prec.digits() + GUARD_DIGITS / 2,
    }
}

fn affine_on_minimal(e: &WeierstrassCurve, p: &ECPoint) -> Result<(std::sync::Arc<MinimalModel>, Rational, Rational)> {
    e.check_point(p)?;
    let m = e.minimal_model()?;
    match m.iso.map_point(p) {
        ECPoint::Infinity => Err(Error::Domain("local height at the origin".into())),
        ECPoint::Affine { x, y } => Ok((m, x, y)),
    }
}

/// `log max(|num x|, den x)`.
pub fn naive_x_height<S: Real>(_e: &WeierstrassCurve, p: &ECPoint, prec: Precision) -> Result<S> {
    let x = p.x().ok_or_else(|| Error::Domain("naive height of the origin".into()))?;
    let top = x.numer().magnitude().max(x.denom().magnitude()).clone();
    Ok(ln_integer::<S>(&top, prec))
}

/// `h_hat` as the doubling limit, exactly zero on torsion.
pub fn canonical_height_doubling<S: Real>(e: &WeierstrassCurve, p: &ECPoint, prec: Precision) -> Result<CanonicalHeightValue<S>> {
    e.check_point(p)?;
    let done = |value| CanonicalHeightValue { value, method: HeightMethod::DoublingLimit, precision: prec };
    if e.is_torsion(p)? {
        return Ok(done(S::zero()));
    }
    let m = e.minimal_model()?;
    let x = m.iso.map_point(p).x().cloned().expect("non-torsion point is affine");
    Ok(done(doubling::doubling_limit::<S>(&m.curve, &x, prec, target_digits::<S>(prec))?))
}

/// Archimedean local height, on the global minimal model.
pub fn local_height_arch<S: Real>(e: &WeierstrassCurve, p: &ECPoint, prec: Precision) -> Result<LocalHeightValue<S>> {
    let (m, x, _) = affine_on_minimal(e, p)?;
    let value = arch::arch_local::<S>(&m.curve, &x, prec, target_digits::<S>(prec));
    Ok(LocalHeightValue { place: Place::Archimedean, value, exact_part: None })
}

/// Local height at the prime `q`, on the global minimal model.
pub fn local_height_nonarch<S: Real>(
    e: &WeierstrassCurve,
    p: &ECPoint,
    q: &BigUint,
    prec: Precision,
) -> Result<LocalHeightValue<S>> {
    let place = Place::finite(q.clone())?;
    let (m, x, y) = affine_on_minimal(e, p)?;
    let coeff = nonarch::nonarch_coefficient(&m.curve, &x, &y, q);
    Ok(finite_value(place, coeff, q, prec))
}

fn finite_value<S: Real>(place: Place, coeff: Rational, q: &BigUint, prec: Precision) -> LocalHeightValue<S> {
    let value = if coeff.is_zero() {
        S::zero()
    } else {
        S::from_rational_in(&coeff, prec) * ln_integer::<S>(q, prec)
    };
    LocalHeightValue { place, value, exact_part: Some(coeff) }
}

/// All nonzero local heights: the archimedean one, then the finite places in
/// increasing order (bad primes and primes in the denominator of `x`).
pub fn local_heights<S: Real>(e: &WeierstrassCurve, p: &ECPoint, prec: Precision) -> Result<Vec<LocalHeightValue<S>>> {
    let (m, x, y) = affine_on_minimal(e, p)?;
    let mut out = vec![LocalHeightValue {
        place: Place::Archimedean,
        value: arch::arch_local::<S>(&m.curve, &x, prec, target_digits::<S>(prec)),
        exact_part: None,
    }];
    let mut primes: Vec<BigUint> = m.bad_primes.clone();
    for (q, _) in factor(x.denom().magnitude(), DEFAULT_FACTOR_BOUND)? {
        if !primes.contains(&q) {
            primes.push(q);
        }
    }
    primes.sort();
    for q in primes {
        let coeff = nonarch::nonarch_coefficient(&m.curve, &x, &y, &q);
        if !coeff.is_zero() {
            out.push(finite_value(Place::Finite(q.clone()), coeff, &q, prec));
        }
    }
    Ok(out)
}

/// Sum of local heights. Good primes only contribute through the
/// denominator of `x`, so they are summed as one logarithm without factoring.
fn raw_local_sum<S: Real>(m: &MinimalModel, x: &Rational, y: &Rational, prec: Precision) -> S {
    let mut total = arch::arch_local::<S>(&m.curve, x, prec, target_digits::<S>(prec));
    let mut good_den = x.denom().clone();
    for q in &m.bad_primes {
        let qi = BigInt::from(q.clone());
        while good_den.is_multiple_of(&qi) {
            good_den /= &qi;
        }
        let coeff = nonarch::nonarch_coefficient(&m.curve, x, y, q);
        if !coeff.is_zero() {
            total = total + S::from_rational_in(&coeff, prec) * ln_integer::<S>(q, prec);
        }
    }
    if !good_den.is_one() {
        total = total + ln_integer::<S>(good_den.magnitude(), prec);
    }
    total
}

/// Sum of all local heights, including at torsion points; for checking.
pub fn local_height_sum<S: Real>(e: &WeierstrassCurve, p: &ECPoint, prec: Precision) -> Result<S> {
    let (m, x, y) = affine_on_minimal(e, p)?;
    Ok(raw_local_sum(&m, &x, &y, prec))
}

/// `h_hat` as the sum of local heights, exactly zero on torsion.
pub fn canonical_height_localsum<S: Real>(e: &WeierstrassCurve, p: &ECPoint, prec: Precision) -> Result<CanonicalHeightValue<S>> {
    e.check_point(p)?;
    let done = |value| CanonicalHeightValue { value, method: HeightMethod::LocalSum, precision: prec };
    if e.is_torsion(p)? {
        return Ok(done(S::zero()));
    }
    let (m, x, y) = affine_on_minimal(e, p)?;
    Ok(done(raw_local_sum(&m, &x, &y, prec)))
}

/// `h_hat(P)` by the local sum, the faster of the two routes.
pub fn canonical_height<S: Real>(e: &WeierstrassCurve, p: &ECPoint, prec: Precision) -> Result<S> {
    Ok(canonical_height_localsum::<S>(e, p, prec)?.value)
}

/// `h_hat(P + Q) - h_hat(P) - h_hat(Q)`.
///
/// This is twice the usual symmetric pairing: `b(P, P) = 2 h_hat(P)`.
pub fn height_bilinear<S: Real>(e: &WeierstrassCurve, p: &ECPoint, q: &ECPoint, prec: Precision) -> Result<S> {
    let sum = e.add(p, q)?;
    let h = |r: &ECPoint| canonical_height::<S>(e, r, prec);
    Ok(h(&sum)? - h(p)? - h(q)?)
}

#[cfg(test)]
mod tests;
