//! Rationals, places of Q, p-adic valuations and the group Q^x (x) Q.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::Rational;

pub const DEFAULT_FACTOR_BOUND: u64 = 1_000_000;

/// Parse `"p/q"`, `"p"` or a plain decimal such as `"-1.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s)
}

pub fn parse_decimal(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a number: {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let d = BigInt::from(10u32).pow(frac_part.len() as u32);
    let q = Rational::new(n, d);
    Ok(if neg { -q } else { q })
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn small_primes(bound: u64) -> std::borrow::Cow<'static, [u32]> {
    static DEFAULT: OnceLock<Vec<u32>> = OnceLock::new();
    if bound == DEFAULT_FACTOR_BOUND {
        return std::borrow::Cow::Borrowed(DEFAULT.get_or_init(|| sieve(DEFAULT_FACTOR_BOUND)));
    }
    std::borrow::Cow::Owned(sieve(bound))
}

fn sieve(bound: u64) -> Vec<u32> {
    let n = bound.min(u32::MAX as u64) as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Miller-Rabin with the first twelve prime bases, which is a proof of
/// primality below 3.3 * 10^24; above that the fixed bases make the answer
/// deterministic but only probable.
pub fn is_prime(n: &BigUint) -> bool {
    const BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &b in &BASES {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s as usize;
    'witness: for &b in &BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Trial division up to `bound`, then a primality test on what is left.
pub fn factor(n: &BigUint, bound: u64) -> Result<Vec<(BigUint, u32)>> {
    if n.is_zero() {
        return Err(Error::Domain("cannot factor zero".into()));
    }
    let mut rem = n.clone();
    let mut out = Vec::new();
    let primes = small_primes(bound);
    let mut exhausted = true;
    for &p in primes.iter() {
        let pb = BigUint::from(p);
        if &pb * &pb > rem {
            exhausted = false;
            break;
        }
        if (&rem % p).is_zero() {
            let mut e = 0u32;
            while (&rem % p).is_zero() {
                rem /= p;
                e += 1;
            }
            out.push((pb, e));
        }
    }
    if !rem.is_one() {
        if exhausted && !is_prime(&rem) {
            return Err(Error::FactorizationIncomplete { cofactor: rem.to_string(), bound });
        }
        out.push((rem, 1));
    }
    Ok(out)
}

pub fn prime_divisors(n: &BigInt, bound: u64) -> Result<Vec<BigUint>> {
    Ok(factor(n.magnitude(), bound)?.into_iter().map(|(p, _)| p).collect())
}

/// Product of the distinct primes dividing `n`.
pub fn radical(n: &BigUint, bound: u64) -> Result<BigUint> {
    Ok(factor(n, bound)?.into_iter().fold(BigUint::one(), |acc, (p, _)| acc * p))
}

/// Valuation of an integer; zero gets a huge sentinel instead of looping.
pub(crate) fn int_valuation(n: &BigInt, p: &BigUint) -> i64 {
    if n.is_zero() {
        return i64::MAX / 4;
    }
    let mut m = n.magnitude().clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

fn check_prime(p: &BigUint) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::Input(format!("{p} is not prime")))
    }
}

/// `v_p(q)` for nonzero `q`.
pub fn padic_valuation(q: &Rational, p: &BigUint) -> Result<i64> {
    if q.is_zero() {
        return Err(Error::Domain("valuation of zero".into()));
    }
    check_prime(p)?;
    Ok(valuation_unchecked(q, p))
}

/// Valuation without the primality check; `p` must be prime and `q` nonzero.
pub(crate) fn valuation_unchecked(q: &Rational, p: &BigUint) -> i64 {
    int_valuation(q.numer(), p) - int_valuation(q.denom(), p)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Finite(BigUint),
    Archimedean,
}

impl Place {
    pub fn finite(p: impl Into<BigUint>) -> Result<Self> {
        let p = p.into();
        check_prime(&p)?;
        Ok(Place::Finite(p))
    }

    pub fn label(&self) -> String {
        match self {
            Place::Finite(p) => p.to_string(),
            Place::Archimedean => "inf".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Place::Archimedean),
            t => {
                let p: BigUint = t.parse().map_err(|_| Error::Parse(format!("bad place {t:?}")))?;
                Place::finite(p)
            }
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// An element of Q^x (x) Q: finitely many primes with nonzero rational exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ValuationVector {
    entries: BTreeMap<BigUint, Rational>,
}

impl ValuationVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (BigUint, Rational)>) -> Result<Self> {
        let mut v = Self::new();
        for (p, e) in entries {
            check_prime(&p)?;
            v.add_entry(p, e);
        }
        Ok(v)
    }

    fn add_entry(&mut self, p: BigUint, e: Rational) {
        use std::collections::btree_map::Entry;
        match self.entries.entry(p) {
            Entry::Vacant(slot) => {
                if !e.is_zero() {
                    slot.insert(e);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += e;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn get(&self, p: &BigUint) -> Rational {
        self.entries.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&BigUint, &Rational)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        ValuationVector { entries: self.entries.iter().map(|(p, e)| (p.clone(), e * c)).collect() }
    }
}

impl Add for &ValuationVector {
    type Output = ValuationVector;
    fn add(self, rhs: &ValuationVector) -> ValuationVector {
        let mut out = self.clone();
        for (p, e) in &rhs.entries {
            out.add_entry(p.clone(), e.clone());
        }
        out
    }
}

impl Neg for &ValuationVector {
    type Output = ValuationVector;
    fn neg(self) -> ValuationVector {
        ValuationVector { entries: self.entries.iter().map(|(p, e)| (p.clone(), -e)).collect() }
    }
}

impl Sub for &ValuationVector {
    type Output = ValuationVector;
    fn sub(self, rhs: &ValuationVector) -> ValuationVector {
        self + &(-rhs)
    }
}

/// Image of `q` in Q^x (x) Q. The sign is torsion and disappears.
pub fn valuation_vector(q: &Rational, bound: u64) -> Result<ValuationVector> {
    if q.is_zero() {
        return Err(Error::Domain("valuation vector of zero".into()));
    }
    let mut v = ValuationVector::new();
    for (p, e) in factor(q.numer().magnitude(), bound)? {
        v.add_entry(p, Rational::from_integer(BigInt::from(e)));
    }
    for (p, e) in factor(q.denom().magnitude(), bound)? {
        v.add_entry(p, Rational::from_integer(-BigInt::from(e)));
    }
    Ok(v)
}

/// `ln p` for an integer prime or any positive integer.
pub fn ln_integer<S: Real>(n: &BigUint, prec: Precision) -> S {
    S::from_rational_in(&Rational::from_integer(BigInt::from(n.clone())), prec).ln()
}

/// `log|q|_v` with the normalisation `|p|_p = 1/p` and the usual absolute
/// value at infinity, so that the product formula holds.
pub fn place_log_norm<S: Real>(q: &Rational, v: &Place, prec: Precision) -> Result<S> {
    if q.is_zero() {
        return Err(Error::Domain("log norm of zero".into()));
    }
    Ok(match v {
        Place::Finite(p) => {
            check_prime(p)?;
            let e = valuation_unchecked(q, p);
            if e == 0 {
                S::zero()
            } else {
                -(S::from_i64_in(e, prec) * ln_integer::<S>(p, prec))
            }
        }
        Place::Archimedean => S::from_rational_in(&q.abs(), prec).ln(),
    })
}

/// Sum of `log|q|_v` over every place where it is nonzero.
pub fn product_formula_defect<S: Real>(q: &Rational, prec: Precision, bound: u64) -> Result<S> {
    if q.is_zero() {
        return Err(Error::Domain("product formula for zero".into()));
    }
    let mut total = place_log_norm::<S>(q, &Place::Archimedean, prec)?;
    let vv = valuation_vector(q, bound)?;
    for (p, e) in vv.entries() {
        let e = S::from_rational_in(e, prec);
        total = total - e * ln_integer::<S>(p, prec);
    }
    Ok(total)
}

pub fn rational_from_i64(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_i64(q: &BigInt) -> Option<i64> {
    q.to_i64()
}
