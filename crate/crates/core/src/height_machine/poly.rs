//! Polynomials and rational functions in `x, y` over Q, with a small parser.
//!
//! Grammar: `expr := term (('+' | '-') term)*`, `term := unary (('*' | '/')? unary)*`,
//! `unary := ('-' | '+') unary | power`, `power := atom ('^' integer)?`,
//! `atom := integer | decimal | 'x' | 'y' | '(' expr ')'`. Juxtaposition
//! multiplies, so `2x^3y` is accepted. Negative exponents need a rational
//! function context.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{format_rational, parse_decimal};
use crate::error::{Error, Result};
use crate::Rational;

/// Sparse polynomial: `(deg_x, deg_y) -> coefficient`, no zero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial(c, 0, 0)
    }

    pub fn monomial(c: Rational, i: u32, j: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Poly { terms }
    }

    pub fn x() -> Self {
        Poly::monomial(Rational::one(), 1, 0)
    }

    pub fn y() -> Self {
        Poly::monomial(Rational::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&k| k == (0, 0))
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::constant(Rational::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    /// Least common denominator of the coefficients.
    pub fn coefficient_denominator(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Evaluation in any ring reachable from Q through `lift`.
    pub fn eval_in<T>(&self, x: &T, y: &T, lift: &dyn Fn(&Rational) -> T) -> T
    where
        T: Clone + Add<Output = T> + Mul<Output = T>,
    {
        let mut total = lift(&Rational::zero());
        let max_i = self.terms.keys().map(|k| k.0).max().unwrap_or(0) as usize;
        let max_j = self.terms.keys().map(|k| k.1).max().unwrap_or(0) as usize;
        let one = lift(&Rational::one());
        let mut xp = vec![one.clone()];
        for _ in 0..max_i {
            let next = xp.last().unwrap().clone() * x.clone();
            xp.push(next);
        }
        let mut yp = vec![one];
        for _ in 0..max_j {
            let next = yp.last().unwrap().clone() * y.clone();
            yp.push(next);
        }
        for ((i, j), c) in &self.terms {
            total = total + lift(c) * xp[*i as usize].clone() * yp[*j as usize].clone();
        }
        total
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        self.eval_in(x, y, &|c: &Rational| c.clone())
    }

    pub fn parse(s: &str) -> Result<Poly> {
        let f = RatFunc::parse(s)?;
        f.as_poly().ok_or_else(|| Error::Parse(format!("'{s}' is not a polynomial")))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (k, v) in &rhs.terms {
            let e = terms.entry(*k).or_insert_with(Rational::zero);
            *e += v;
            if e.is_zero() {
                terms.remove(k);
            }
        }
        Poly { terms }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect() }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for ((i, j), a) in &self.terms {
            for ((k, l), b) in &rhs.terms {
                out = &out + &Poly::monomial(a * b, i + k, j + l);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // Highest total degree first, then by x degree.
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by_key(|&(&(i, j), _)| std::cmp::Reverse((i + j, i)));
        for (n, ((i, j), c)) in keys.into_iter().enumerate() {
            let neg = c.is_negative();
            if n == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let a = c.abs();
            let has_var = *i > 0 || *j > 0;
            if !has_var || !a.is_one() {
                let s = format_rational(&a);
                if has_var && !a.is_integer() {
                    write!(f, "({s})")?;
                } else {
                    f.write_str(&s)?;
                }
                if has_var {
                    f.write_str("*")?;
                }
            }
            let mut parts = Vec::new();
            for (v, e) in [("x", *i), ("y", *j)] {
                match e {
                    0 => {}
                    1 => parts.push(v.to_string()),
                    _ => parts.push(format!("{v}^{e}")),
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

/// A quotient `num / den` of polynomials; not reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::constant(Rational::one()) }
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Input("zero denominator".into()));
        }
        Ok(RatFunc { num, den })
    }

    pub fn x() -> Self {
        RatFunc::from_poly(Poly::x())
    }

    pub fn y() -> Self {
        RatFunc::from_poly(Poly::y())
    }

    pub fn constant(c: Rational) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn as_poly(&self) -> Option<Poly> {
        if self.den.is_constant() {
            let c = self.den.terms().next().map(|(_, c)| c.clone())?;
            Some(self.num.scale(&c.recip()))
        } else {
            None
        }
    }

    /// Depends on neither variable (after cross-multiplying).
    pub fn is_constant(&self) -> bool {
        // num / den is constant iff num * den' - num' * den vanishes for the
        // dependence on x and y; test proportionality of coefficient maps.
        if self.num.is_zero() {
            return true;
        }
        let (k, c) = self.den.terms().next().expect("nonzero denominator");
        let ratio = match self.num.terms.get(k) {
            Some(n) => n / c,
            None => return false,
        };
        &self.num - &self.den.scale(&ratio) == Poly::zero()
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Option<Rational> {
        let d = self.den.eval(x, y);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x, y) / d)
        }
    }

    pub fn pow(&self, e: i32) -> Result<RatFunc> {
        let (n, d) = if e >= 0 { (&self.num, &self.den) } else { (&self.den, &self.num) };
        RatFunc::new(n.pow(e.unsigned_abs()), d.pow(e.unsigned_abs()))
    }

    pub fn div(&self, rhs: &RatFunc) -> Result<RatFunc> {
        RatFunc::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    /// `self(u, v)` for rational functions `u, v`.
    pub fn compose(&self, u: &RatFunc, v: &RatFunc) -> Result<RatFunc> {
        let lift = |c: &Rational| RatFunc::constant(c.clone());
        let n = self.num.eval_in(u, v, &lift);
        let d = self.den.eval_in(u, v, &lift);
        n.div(&d)
    }

    pub fn parse(s: &str) -> Result<RatFunc> {
        let mut p = Parser { src: s, chars: s.char_indices().collect(), pos: 0 };
        let f = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected character"));
        }
        Ok(f)
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc { num: &self.num + &rhs.num, den: self.den };
        }
        RatFunc { num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den), den: &self.den * &rhs.den }
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: RatFunc) -> RatFunc {
        RatFunc { num: &self.num * &rhs.num, den: &self.den * &rhs.den }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den }
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: RatFunc) -> RatFunc {
        self + (-rhs)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_poly() {
            Some(p) => write!(f, "{p}"),
            None => write!(f, "({})/({})", self.num, self.den),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        let col = self.chars.get(self.pos).map_or(self.src.len(), |c| c.0) + 1;
        Error::Parse(format!("{what} at column {col} in '{}'", self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn expr(&mut self) -> Result<RatFunc> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFunc> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    if rhs.num.is_zero() {
                        return Err(self.error("division by zero"));
                    }
                    acc = acc.div(&rhs)?;
                }
                Some(c) if c.is_ascii_digit() || c == 'x' || c == 'y' || c == '(' => {
                    acc = acc * self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatFunc> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatFunc> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let neg = if self.peek() == Some('-') {
                self.pos += 1;
                true
            } else {
                false
            };
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected integer exponent"));
            }
            let digits: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
            let e: i32 = digits.parse().map_err(|_| self.error("exponent too large"))?;
            if e > 4096 {
                return Err(self.error("exponent too large"));
            }
            if neg && base.num.is_zero() {
                return Err(self.error("division by zero"));
            }
            return base.pow(if neg { -e } else { e });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFunc> {
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                Ok(RatFunc::x())
            }
            Some('y') => {
                self.pos += 1;
                Ok(RatFunc::y())
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.pos < self.chars.len() && (self.chars[self.pos].1.is_ascii_digit() || self.chars[self.pos].1 == '.') {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                let q = parse_decimal(&text).map_err(|_| self.error("malformed number"))?;
                Ok(RatFunc::constant(q))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses `lhs = rhs` (or a bare expression) into the polynomial `lhs - rhs`.
pub fn parse_equation(s: &str) -> Result<Poly> {
    let mut parts = s.split('=');
    let lhs = parts.next().unwrap_or("");
    match (parts.next(), parts.next()) {
        (None, _) => Poly::parse(lhs),
        (Some(rhs), None) => Ok(&Poly::parse(lhs)? - &Poly::parse(rhs)?),
        _ => Err(Error::Parse(format!("more than one '=' in '{s}'"))),
    }
}
