//! Binary floating point with a per-value mantissa width.
//!
//! A value is `mant * 2^exp` with `|mant| < 2^prec`. Results of arithmetic
//! carry the larger precision of their operands and are rounded to nearest
//! (ties to even). A precision of zero marks an exact constant; such values
//! are never rounded until they meet a finite-precision operand.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

/// Bits used when two exact operands must be divided.
const FALLBACK_BITS: u32 = 128;

#[derive(Clone)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

impl BigFloat {
    pub fn from_int(v: impl Into<BigInt>, prec: u32) -> Self {
        Self::raw(v.into(), 0, prec)
    }

    pub fn exact(v: impl Into<BigInt>) -> Self {
        Self::raw(v.into(), 0, 0)
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let prec = if prec == 0 { FALLBACK_BITS } else { prec };
        if q.is_zero() {
            return Self::raw(BigInt::zero(), 0, prec);
        }
        let num = q.numer();
        let den = q.denom();
        let shift = (prec as i64 + 2) + den.bits() as i64 - num.magnitude().bits() as i64;
        let shift = shift.max(0);
        let scaled = num << shift as usize;
        let (quo, rem) = scaled.div_rem(den);
        // sticky bit keeps rounding of inexact quotients correct
        let mant = (quo << 1usize) + if rem.is_zero() { BigInt::zero() } else { rem.signum() };
        Self::raw(mant, -shift - 1, prec)
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        assert!(v.is_finite(), "non-finite f64");
        if v == 0.0 {
            return Self::raw(BigInt::zero(), 0, prec);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
        Self::raw(BigInt::from(sign) * BigInt::from(m), ex, prec)
    }

    fn raw(mant: BigInt, exp: i64, prec: u32) -> Self {
        let mut v = BigFloat { mant, exp, prec };
        v.normalize();
        v
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(mut self, prec: u32) -> Self {
        self.prec = prec;
        self.normalize();
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum_i32(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Exponent of the leading bit: `2^(e-1) <= |x| < 2^e`.
    pub fn magnitude_exp(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        if self.prec > 0 {
            let bits = self.mant.bits();
            if bits > self.prec as u64 {
                let drop = bits - self.prec as u64;
                self.mant = round_shift(&self.mant, drop);
                self.exp += drop as i64;
                if self.mant.bits() > self.prec as u64 {
                    self.mant >>= 1usize;
                    self.exp += 1;
                }
            }
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz as usize;
            self.exp += tz as i64;
        }
    }

    fn result_prec(a: &Self, b: &Self) -> u32 {
        a.prec.max(b.prec)
    }

    pub fn abs(&self) -> Self {
        BigFloat { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        BigFloat { mant: self.mant.clone(), exp: self.exp + k, prec: self.prec }
    }

    fn add_impl(&self, other: &Self, negate_other: bool) -> Self {
        let prec = Self::result_prec(self, other);
        let omant = if negate_other { -&other.mant } else { other.mant.clone() };
        if other.mant.is_zero() {
            return self.clone().with_precision(prec);
        }
        if self.mant.is_zero() {
            return Self::raw(omant, other.exp, prec);
        }
        let (hi, lo, hi_m, lo_m) = if self.magnitude_exp() >= other.magnitude_exp() {
            (self, other, self.mant.clone(), omant)
        } else {
            (other, self, omant, self.mant.clone())
        };
        // a far smaller operand only contributes a sticky bit
        if prec > 0 && hi.magnitude_exp() - lo.magnitude_exp() > prec as i64 + 4 {
            let shift = prec as i64 + 8;
            let base_exp = hi.magnitude_exp() - shift;
            let m = if hi.exp >= base_exp {
                hi_m << (hi.exp - base_exp) as usize
            } else {
                round_shift(&hi_m, (base_exp - hi.exp) as u64)
            };
            let m = m * 2 + lo_m.signum();
            return Self::raw(m, base_exp - 1, prec);
        }
        let e = hi.exp.min(lo.exp);
        let a = hi_m << (hi.exp - e) as usize;
        let b = lo_m << (lo.exp - e) as usize;
        Self::raw(a + b, e, prec)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let prec = Self::result_prec(self, other);
        Self::raw(&self.mant * &other.mant, self.exp + other.exp, prec)
    }

    fn div_impl(&self, other: &Self) -> Self {
        assert!(!other.mant.is_zero(), "BigFloat division by zero");
        let mut prec = Self::result_prec(self, other);
        if prec == 0 {
            prec = FALLBACK_BITS;
        }
        if self.mant.is_zero() {
            return Self::raw(BigInt::zero(), 0, prec);
        }
        let shift =
            (prec as i64 + 2 + other.mant.bits() as i64 - self.mant.bits() as i64).max(0);
        let num = &self.mant << shift as usize;
        let (q, r) = num.div_rem(&other.mant);
        let sticky = if r.is_zero() {
            BigInt::zero()
        } else {
            self.mant.signum() * other.mant.signum()
        };
        let mant = (q << 1usize) + sticky;
        Self::raw(mant, self.exp - other.exp - shift - 1, prec)
    }

    pub fn sqrt(&self) -> Self {
        assert!(self.mant.sign() != Sign::Minus, "sqrt of negative BigFloat");
        let prec = if self.prec == 0 { FALLBACK_BITS } else { self.prec };
        if self.mant.is_zero() {
            return Self::raw(BigInt::zero(), 0, prec);
        }
        let want = 2 * (prec as i64 + 4);
        let mut shift = (want - self.mant.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = self.mant.magnitude() << shift as usize;
        let root = m.sqrt();
        let sticky = if &root * &root == m { 0 } else { 1 };
        let mant = BigInt::from((root << 1usize) + BigUint::from(sticky as u32));
        Self::raw(mant, (self.exp - shift) / 2 - 1, prec)
    }

    /// Natural logarithm. Panics on non-positive input.
    pub fn ln(&self) -> Self {
        assert!(self.mant.sign() == Sign::Plus, "ln of non-positive BigFloat");
        let prec = if self.prec == 0 { FALLBACK_BITS } else { self.prec };
        let work = prec + 32;
        // x = m * 2^k with m in [1/sqrt2, sqrt2)
        let mut k = self.magnitude_exp() - 1;
        let mut m = self.clone().with_precision(work).mul_pow2(-k);
        let sqrt2 = BigFloat::from_int(2, work).sqrt();
        if m > sqrt2 {
            m = m.mul_pow2(-1);
            k += 1;
        }
        let one = BigFloat::from_int(1, work);
        let s = (&m - &one) / (&m + &one);
        let log_m = atanh_series(&s, work).mul_pow2(1);
        let total = if k == 0 { log_m } else { log_m + ln2(work) * BigFloat::from_int(k, work) };
        total.with_precision(prec)
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let drop = (bits - 60).max(0);
        let m = (&self.mant >> drop as usize).to_f64().unwrap_or(0.0);
        let mut e = self.exp + drop;
        let mut v = m;
        while e > 0 {
            let step = e.min(1000);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        while e < 0 {
            let step = (-e).min(1000);
            v /= 2f64.powi(step as i32);
            e += step;
        }
        v
    }

    /// Exact rational value of the stored binary number.
    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << self.exp as usize)
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Round to `digits` places after the decimal point, half away from zero.
    pub fn to_fixed(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = &self.mant * scale;
        let q = if self.exp >= 0 {
            scaled << self.exp as usize
        } else {
            let sh = (-self.exp) as u64;
            let neg = scaled.is_negative();
            let mag = scaled.abs();
            let half = BigInt::one() << (sh - 1) as usize;
            let r = (mag + half) >> sh as usize;
            if neg {
                -r
            } else {
                r
            }
        };
        let neg = q.is_negative();
        let mut s = q.abs().to_string();
        if s.len() <= digits {
            s = "0".repeat(digits + 1 - s.len()) + &s;
        }
        let split = s.len() - digits;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&s[..split]);
        if digits > 0 {
            out.push('.');
            out.push_str(&s[split..]);
        }
        out
    }
}

fn round_shift(m: &BigInt, drop: u64) -> BigInt {
    if drop == 0 {
        return m.clone();
    }
    let neg = m.is_negative();
    let mag = m.magnitude();
    let q = mag >> drop as usize;
    let rem = mag - (&q << drop as usize);
    let half = BigUint::one() << (drop - 1) as usize;
    let q = match rem.cmp(&half) {
        Ordering::Greater => q + 1u32,
        Ordering::Less => q,
        Ordering::Equal => {
            if q.is_odd() {
                q + 1u32
            } else {
                q
            }
        }
    };
    let q = BigInt::from(q);
    if neg {
        -q
    } else {
        q
    }
}

/// atanh(s) = s + s^3/3 + s^5/5 + ..., for |s| < 1/5.
fn atanh_series(s: &BigFloat, work: u32) -> BigFloat {
    let s2 = s * s;
    let mut power = s.clone();
    let mut sum = s.clone();
    let mut k: i64 = 1;
    let stop = -(work as i64) - 8;
    loop {
        power = &power * &s2;
        if power.is_zero() || power.magnitude_exp() < stop {
            break;
        }
        k += 2;
        sum = sum + &power / &BigFloat::from_int(k, work);
    }
    sum
}

fn ln2(work: u32) -> BigFloat {
    static CACHE: OnceLock<Mutex<HashMap<u32, BigFloat>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("ln2 cache poisoned").get(&work) {
        return v.clone();
    }
    // ln 2 = 2 atanh(1/3)
    let third = BigFloat::from_int(1, work + 16) / BigFloat::from_int(3, work + 16);
    let v = atanh_series(&third, work + 16).mul_pow2(1).with_precision(work);
    cache.lock().expect("ln2 cache poisoned").insert(work, v.clone());
    v
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl BigFloat {
    fn cmp_value(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum_i32(), other.signum_i32());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({:e}, {} bits)", self.to_f64(), self.prec)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(((self.prec as f64) * std::f64::consts::LOG10_2) as usize);
        write!(f, "{}", self.to_fixed(digits))
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat { mant: -self.mant, exp: self.exp, prec: self.prec }
    }
}

impl Neg for &BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat { mant: -&self.mant, exp: self.exp, prec: self.prec }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &BigFloat) -> BigFloat {
                let f: fn(&BigFloat, &BigFloat) -> BigFloat = $body;
                f(self, rhs)
            }
        }
        impl $tr<BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&BigFloat> for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &BigFloat) -> BigFloat {
                (&self).$method(rhs)
            }
        }
        impl $tr<BigFloat> for &BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_impl(b, false));
forward_binop!(Sub, sub, |a, b| a.add_impl(b, true));
forward_binop!(Mul, mul, |a, b| a.mul_impl(b));
forward_binop!(Div, div, |a, b| a.div_impl(b));
forward_binop!(Rem, rem, |a, b| {
    let q = a.div_impl(b).to_rational().trunc();
    a - &(b * &BigFloat::exact(q.to_integer()))
});

impl Zero for BigFloat {
    fn zero() -> Self {
        BigFloat::exact(0)
    }
    fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }
}

impl One for BigFloat {
    fn one() -> Self {
        BigFloat::exact(1)
    }
}

impl num_traits::Num for BigFloat {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("unsupported radix {radix}"));
        }
        let q = crate::arith::parse_decimal(s).map_err(|e| e.to_string())?;
        Ok(BigFloat::from_rational(&q, 0))
    }
}
