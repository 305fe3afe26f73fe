//! Real scalar abstraction.
//!
//! Height computations are written once against [`Real`] and run either in
//! hardware floats (`f32`, `f64`) for quick estimates or in [`BigFloat`] when
//! a requested number of decimal digits has to be certified.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::Num;

use crate::bigfloat::BigFloat;
use crate::Rational;

/// Decimal digits kept beyond the requested precision.
pub const GUARD_DIGITS: u32 = 12;

/// Requested accuracy in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(pub u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(50);

    pub fn digits(self) -> u32 {
        self.0
    }

    /// Mantissa bits for intermediate values, including guard digits.
    pub fn working_bits(self) -> u32 {
        (((self.0 + GUARD_DIGITS) as f64) * std::f64::consts::LOG2_10).ceil() as u32 + 8
    }

    /// `10^-digits`, the absolute error target.
    pub fn epsilon(self) -> f64 {
        10f64.powi(-(self.0 as i32))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

pub trait Real:
    Num + Neg<Output = Self> + Clone + PartialOrd + Debug + Send + Sync + 'static
{
    fn from_i64_in(v: i64, prec: Precision) -> Self;
    fn from_rational_in(q: &Rational, prec: Precision) -> Self;
    fn from_f64_in(v: f64, prec: Precision) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Fixed-point rendering with `digits` places after the decimal point.
    fn to_decimal(&self, digits: usize) -> String;
    /// Significant decimal digits the type can carry, `None` if unbounded.
    fn digit_capacity() -> Option<u32>;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

macro_rules! hardware_real {
    ($($t:ty => $digits:expr),*) => {$(
        impl Real for $t {
            fn from_i64_in(v: i64, _: Precision) -> Self {
                v as $t
            }
            fn from_rational_in(q: &Rational, _: Precision) -> Self {
                BigFloat::from_rational(q, 64).to_f64() as $t
            }
            fn from_f64_in(v: f64, _: Precision) -> Self {
                v as $t
            }
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn to_decimal(&self, digits: usize) -> String {
                let s = format!("{:.*}", digits, self);
                if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
                    s[1..].to_string()
                } else {
                    s
                }
            }
            fn digit_capacity() -> Option<u32> {
                Some($digits)
            }
        }
    )*};
}

hardware_real!(f32 => 6, f64 => 15);

impl Real for BigFloat {
    fn from_i64_in(v: i64, prec: Precision) -> Self {
        BigFloat::from_int(v, prec.working_bits())
    }
    fn from_rational_in(q: &Rational, prec: Precision) -> Self {
        BigFloat::from_rational(q, prec.working_bits())
    }
    fn from_f64_in(v: f64, prec: Precision) -> Self {
        BigFloat::from_f64(v, prec.working_bits())
    }
    fn ln(&self) -> Self {
        BigFloat::ln(self)
    }
    fn sqrt(&self) -> Self {
        BigFloat::sqrt(self)
    }
    fn abs(&self) -> Self {
        BigFloat::abs(self)
    }
    fn to_f64(&self) -> f64 {
        BigFloat::to_f64(self)
    }
    fn to_decimal(&self, digits: usize) -> String {
        let s = self.to_fixed(digits);
        if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    }
    fn digit_capacity() -> Option<u32> {
        None
    }
}

/// Digits a computation can actually certify in scalar type `S`.
pub fn effective_digits<S: Real>(prec: Precision) -> u32 {
    match S::digit_capacity() {
        Some(cap) => prec.digits().min(cap),
        None => prec.digits(),
    }
}
