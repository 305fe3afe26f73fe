//! Weil heights on curves through maps to elliptic curves.
//!
//! A bundle `L` on a plane curve `X` is presented by a quadruple: maps
//! `f_i: X -> E_i`, integer weights `w_i`, bundle degrees `d_i` and an integer
//! `m` with `L^m = (x)_i f_i^* O(d_i (O))^{w_i}`. Its height is
//! `h_L = (1/m) sum_i w_i (d_i / 2) h(f_i(P))`.
//!
//! Heights are first assembled as exact rational combinations of canonical
//! heights of image points, so identities that hold formally (tensor powers,
//! concatenations) come out exactly zero rather than zero up to rounding.

pub mod demos;
mod modp;
pub mod poly;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::elliptic::{ECPoint, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::heights::canonical_height;
use crate::scalar::{Precision, Real};
use crate::Rational;
use modp::{eval_poly, is_small_prime, max_fiber, CurveModP, Fp};
pub use poly::{parse_equation, Poly, RatFunc};

/// A rational point of a plane curve, with a label for reports.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SourcePoint {
    pub id: String,
    pub x: Rational,
    pub y: Rational,
}

impl SourcePoint {
    pub fn new(id: impl Into<String>, x: Rational, y: Rational) -> Self {
        SourcePoint { id: id.into(), x, y }
    }
}

/// An affine plane model `F(x, y) = 0`. Smoothness and genus are not checked.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneCurve {
    pub label: String,
    pub equation: Poly,
    pub points: Vec<SourcePoint>,
}

impl PlaneCurve {
    pub fn new(label: impl Into<String>, equation: Poly, points: Vec<SourcePoint>) -> Result<Self> {
        if equation.is_constant() {
            return Err(Error::Input("curve equation is constant".into()));
        }
        let c = PlaneCurve { label: label.into(), equation, points: Vec::new() };
        for p in &points {
            c.check(&p.x, &p.y)?;
        }
        Ok(PlaneCurve { points, ..c })
    }

    /// An elliptic curve viewed as the plane curve of its Weierstrass equation.
    pub fn from_weierstrass(label: impl Into<String>, e: &WeierstrassCurve, points: Vec<SourcePoint>) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = e.coeffs();
        let x = Poly::x();
        let y = Poly::y();
        let c = |q: &Rational| Poly::constant(q.clone());
        let lhs = &(&y * &y) + &(&(&c(a1) * &(&x * &y)) + &(&c(a3) * &y));
        let rhs = &(&(&x.pow(3) + &(&c(a2) * &x.pow(2))) + &(&c(a4) * &x)) + &c(a6);
        PlaneCurve::new(label, &lhs - &rhs, points)
    }

    pub fn contains(&self, x: &Rational, y: &Rational) -> bool {
        self.equation.eval(x, y).is_zero()
    }

    pub fn check(&self, x: &Rational, y: &Rational) -> Result<()> {
        if self.contains(x, y) {
            Ok(())
        } else {
            Err(Error::NotOnCurve)
        }
    }
}

/// A map between affine plane models, `(x, y) -> (u(x, y), v(x, y))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneMap {
    pub u: RatFunc,
    pub v: RatFunc,
}

impl PlaneMap {
    pub fn eval(&self, x: &Rational, y: &Rational) -> Result<(Rational, Rational)> {
        let indeterminate = || Error::Indeterminate(format!("({x}, {y})"));
        Ok((self.u.eval(x, y).ok_or_else(indeterminate)?, self.v.eval(x, y).ok_or_else(indeterminate)?))
    }
}

/// `f: X -> E`, `P -> (u(P), v(P)) + T` for a fixed translation `T` in `E(Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    pub u: RatFunc,
    pub v: RatFunc,
    pub target: WeierstrassCurve,
    pub declared_degree: u32,
    pub translation: ECPoint,
}

impl RationalMap {
    pub fn new(u: RatFunc, v: RatFunc, target: WeierstrassCurve, declared_degree: u32) -> Result<Self> {
        if declared_degree == 0 {
            return Err(Error::Input("declared degree must be at least 1".into()));
        }
        if u.is_constant() {
            return Err(Error::Input("x-component is constant, so the map cannot be dominant".into()));
        }
        Ok(RationalMap { u, v, target, declared_degree, translation: ECPoint::Infinity })
    }

    pub fn identity(e: &WeierstrassCurve) -> Self {
        RationalMap::new(RatFunc::x(), RatFunc::y(), e.clone(), 1).expect("identity is nonconstant")
    }

    /// `f + T`; same degree as `f`.
    pub fn translated(&self, t: &ECPoint) -> Result<Self> {
        self.target.check_point(t)?;
        let translation = self.target.add(&self.translation, t)?;
        Ok(RationalMap { translation, ..self.clone() })
    }

    /// Exact image, verified on the target equation.
    pub fn eval(&self, x: &Rational, y: &Rational) -> Result<ECPoint> {
        let indeterminate = || Error::Indeterminate(format!("({x}, {y})"));
        let u = self.u.eval(x, y).ok_or_else(indeterminate)?;
        let v = self.v.eval(x, y).ok_or_else(indeterminate)?;
        let p = ECPoint::affine(u, v);
        if !self.target.contains(&p) {
            return Err(Error::ModelInconsistency(format!("image {p} of ({x}, {y}) is not on {}", self.target)));
        }
        self.target.add(&p, &self.translation)
    }

    /// `f o g`.
    pub fn compose(&self, g: &PlaneMap) -> Result<Self> {
        Ok(RationalMap { u: self.u.compose(&g.u, &g.v)?, v: self.v.compose(&g.u, &g.v)?, ..self.clone() })
    }
}

/// A curve with its known rational points and maps to elliptic curves.
#[derive(Clone, Debug)]
pub struct CurveSystem {
    pub curve: PlaneCurve,
    pub maps: Vec<RationalMap>,
}

impl CurveSystem {
    /// Checks every known point whose image is defined lands on the target.
    pub fn new(curve: PlaneCurve, maps: Vec<RationalMap>) -> Result<Self> {
        for f in &maps {
            for p in &curve.points {
                match f.eval(&p.x, &p.y) {
                    Ok(_) | Err(Error::Indeterminate(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(CurveSystem { curve, maps })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadrupleTerm {
    pub map: RationalMap,
    pub weight: i64,
    pub degree: u32,
}

/// `(A, f, M, m)`: `L^m = (x)_i f_i^* O(d_i (O))^{w_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleQuadruple {
    pub terms: Vec<QuadrupleTerm>,
    pub m: u32,
}

impl BundleQuadruple {
    pub fn new(terms: Vec<QuadrupleTerm>, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Input("m must be at least 1".into()));
        }
        if let Some(t) = terms.iter().find(|t| t.degree == 0) {
            return Err(Error::Input(format!("bundle degree 0 on map to {}", t.map.target)));
        }
        Ok(BundleQuadruple { terms, m })
    }

    /// `f^* O(d (O))`.
    pub fn single(map: RationalMap, degree: u32) -> Self {
        BundleQuadruple { terms: vec![QuadrupleTerm { map, weight: 1, degree }], m: 1 }
    }

    pub fn trivial() -> Self {
        BundleQuadruple { terms: Vec::new(), m: 1 }
    }

    /// `(M^t, t m)`: presents the same bundle.
    pub fn rescaled(&self, t: u32) -> Result<Self> {
        let terms = self.terms.iter().map(|q| QuadrupleTerm { degree: q.degree * t, ..q.clone() }).collect();
        BundleQuadruple::new(terms, self.m * t)
    }

    /// `L^k`, by scaling the weights.
    pub fn power(&self, k: i64) -> Self {
        let terms = self.terms.iter().map(|q| QuadrupleTerm { weight: q.weight * k, ..q.clone() }).collect();
        BundleQuadruple { terms, m: self.m }
    }

    /// `L1 (x) L2` as the concatenation over the common `m`.
    pub fn tensor(&self, other: &BundleQuadruple) -> Self {
        let m = num_integer::lcm(self.m, other.m);
        let lift = |q: &BundleQuadruple| {
            let k = (m / q.m) as i64;
            q.terms.iter().map(move |t| QuadrupleTerm { weight: t.weight * k, ..t.clone() }).collect::<Vec<_>>()
        };
        BundleQuadruple { terms: lift(self).into_iter().chain(lift(other)).collect(), m }
    }

    /// `g^* L` for `g: Y -> X`.
    pub fn pullback(&self, g: &PlaneMap) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok(QuadrupleTerm { map: t.map.compose(g)?, ..t.clone() }))
            .collect::<Result<Vec<_>>>()?;
        BundleQuadruple::new(terms, self.m)
    }

    /// `deg L = (1/m) sum_i w_i d_i deg f_i`, from declared map degrees.
    pub fn degree(&self) -> Rational {
        let total: i64 = self.terms.iter().map(|t| t.weight * t.degree as i64 * t.map.declared_degree as i64).sum();
        Rational::new(total.into(), self.m.into())
    }

    /// `h_L(P)` as an exact combination of canonical heights.
    pub fn combination(&self, x: &Rational, y: &Rational) -> Result<HeightCombination> {
        let mut c = HeightCombination::default();
        for t in &self.terms {
            let image = t.map.eval(x, y)?;
            if t.map.target.is_torsion(&image)? {
                continue;
            }
            let coeff = Rational::new(BigInt::from(t.weight) * BigInt::from(t.degree), BigInt::from(2 * self.m));
            c.push(coeff, &t.map.target, image);
        }
        Ok(c)
    }
}

/// `sum_k c_k h(P_k)` with rational `c_k`; equal points are merged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HeightCombination {
    terms: Vec<(Rational, WeierstrassCurve, ECPoint)>,
}

impl HeightCombination {
    pub fn push(&mut self, c: Rational, e: &WeierstrassCurve, p: ECPoint) {
        // h(-P) = h(P): merge P and -P.
        let neg = e.neg(&p);
        let key = if neg < p { neg } else { p };
        if let Some(slot) = self.terms.iter_mut().find(|t| &t.1 == e && t.2 == key) {
            slot.0 += c;
        } else {
            self.terms.push((c, e.clone(), key));
        }
        self.terms.retain(|t| !t.0.is_zero());
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut out = HeightCombination::default();
        for (c, e, p) in &self.terms {
            out.push(c * k, e, p.clone());
        }
        out
    }

    pub fn plus(&self, other: &HeightCombination) -> Self {
        let mut out = self.clone();
        for (c, e, p) in &other.terms {
            out.push(c.clone(), e, p.clone());
        }
        out
    }

    pub fn minus(&self, other: &HeightCombination) -> Self {
        self.plus(&other.scale(&-Rational::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate<S: Real>(&self, prec: Precision) -> Result<S> {
        let mut total = S::zero();
        for (c, e, p) in &self.terms {
            total = total + S::from_rational_in(c, prec) * canonical_height::<S>(e, p, prec)?;
        }
        Ok(total)
    }
}

/// `h_L(P) = (1/m) sum_i w_i (d_i / 2) h(f_i(P))`.
pub fn weil_height<S: Real>(q: &BundleQuadruple, x: &Rational, y: &Rational, prec: Precision) -> Result<S> {
    q.combination(x, y)?.evaluate(prec)
}

/// Pass thresholds for the empirical `O(1)` laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeConfig {
    /// Largest allowed spread of `h_{L1 (x) L2} - h_{L1} - h_{L2}`.
    pub additivity: f64,
    /// Largest allowed ratio of the square-root fit on the top-height half to
    /// the fit on the bottom half.
    pub growth: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig { additivity: 5.0, growth: 1.5 }
    }
}

#[derive(Clone, Debug)]
pub struct DiagnosticSample<S> {
    pub id: String,
    pub values: Vec<S>,
}

/// Square-root envelope fits `|r| <= C (1 + |h|^{1/2})` over parts of a corpus.
#[derive(Clone, Debug)]
pub struct EnvelopeFit<S> {
    pub all: S,
    pub bottom: S,
    pub top: S,
    /// `top / bottom`; infinite when only the top half is nonzero.
    pub growth: f64,
}

#[derive(Clone, Debug)]
pub struct DiagnosticReport<S> {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub samples: Vec<DiagnosticSample<S>>,
    pub spread: S,
    /// `(C0, C1)`: constant and square-root envelope constants.
    pub fitted: (S, S),
    pub fit: Option<EnvelopeFit<S>>,
    pub threshold: f64,
    pub passed: bool,
}

fn spread_of<S: Real>(values: &[S]) -> S {
    let mut it = values.iter();
    let Some(first) = it.next() else { return S::zero() };
    let (mut lo, mut hi) = (first.clone(), first.clone());
    for v in it {
        if *v < lo {
            lo = v.clone();
        }
        if *v > hi {
            hi = v.clone();
        }
    }
    hi - lo
}

fn max_of<S: Real>(values: impl IntoIterator<Item = S>) -> S {
    values.into_iter().fold(S::zero(), |a, b| a.max_of(b))
}

/// Spread of `h_{L12} - h_{L1} - h_{L2}` over the corpus.
pub fn additivity_diagnostic<S: Real>(
    q1: &BundleQuadruple,
    q2: &BundleQuadruple,
    q12: &BundleQuadruple,
    corpus: &[SourcePoint],
    config: &EnvelopeConfig,
    prec: Precision,
) -> Result<DiagnosticReport<S>> {
    if corpus.is_empty() {
        return Err(Error::Input("empty corpus".into()));
    }
    let mut samples = Vec::with_capacity(corpus.len());
    for p in corpus {
        let c1 = q1.combination(&p.x, &p.y)?;
        let c2 = q2.combination(&p.x, &p.y)?;
        let c12 = q12.combination(&p.x, &p.y)?;
        let diff = c12.minus(&c1).minus(&c2).evaluate::<S>(prec)?;
        samples.push(DiagnosticSample {
            id: p.id.clone(),
            values: vec![c1.evaluate(prec)?, c2.evaluate(prec)?, c12.evaluate(prec)?, diff],
        });
    }
    let diffs: Vec<S> = samples.iter().map(|s| s.values[3].clone()).collect();
    let spread = spread_of(&diffs);
    let c0 = max_of(diffs.iter().map(Real::abs));
    let passed = spread.to_f64() <= config.additivity;
    Ok(DiagnosticReport {
        kind: "additivity",
        columns: vec!["h_L1", "h_L2", "h_L12", "difference"],
        samples,
        spread,
        fitted: (c0, S::zero()),
        fit: None,
        threshold: config.additivity,
        passed,
    })
}

/// Residuals `h_{L0} - (deg L0 / deg L) h_L` against the envelope
/// `C (1 + |h_L|^{1/2})`.
///
/// The fit is stable when restricting to the top-height half does not raise
/// `C`, and the top-half constant is at most `growth` times the bottom-half
/// one. A law of the wrong order (residuals growing like `h_L`) makes the
/// second ratio grow with the height range.
pub fn degree_ratio_diagnostic<S: Real>(
    q0: &BundleQuadruple,
    q: &BundleQuadruple,
    deg_l0: i64,
    deg_l: u32,
    corpus: &[SourcePoint],
    config: &EnvelopeConfig,
    prec: Precision,
) -> Result<DiagnosticReport<S>> {
    if deg_l == 0 {
        return Err(Error::Input("deg L must be positive".into()));
    }
    if corpus.len() < 6 {
        return Err(Error::Input(format!("corpus has {} points, need at least 6", corpus.len())));
    }
    let ratio = Rational::new(deg_l0.into(), deg_l.into());
    let mut rows: Vec<(S, DiagnosticSample<S>)> = Vec::with_capacity(corpus.len());
    for p in corpus {
        let c = q.combination(&p.x, &p.y)?;
        let c0 = q0.combination(&p.x, &p.y)?;
        let residual = c0.minus(&c.scale(&ratio)).evaluate::<S>(prec)?;
        let h = c.evaluate::<S>(prec)?;
        let envelope = S::from_i64_in(1, prec) + h.abs().sqrt();
        let ratio_c = residual.abs() / envelope;
        rows.push((h.clone(), DiagnosticSample { id: p.id.clone(), values: vec![h, c0.evaluate(prec)?, residual, ratio_c] }));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let half = rows.len() / 2;
    let fit_over = |r: &[(S, DiagnosticSample<S>)]| max_of(r.iter().map(|(_, s)| s.values[3].clone()));
    let all = fit_over(&rows);
    let bottom = fit_over(&rows[..half]);
    let top = fit_over(&rows[half..]);
    let growth = if bottom.is_zero() {
        if top.is_zero() {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        (top.clone() / bottom.clone()).to_f64()
    };
    let passed = top <= all && growth <= config.growth;
    let samples: Vec<DiagnosticSample<S>> = rows.into_iter().map(|(_, s)| s).collect();
    let residuals: Vec<S> = samples.iter().map(|s| s.values[2].clone()).collect();
    Ok(DiagnosticReport {
        kind: "degree-ratio",
        columns: vec!["h_L", "h_L0", "residual", "residual/(1+sqrt|h_L|)"],
        spread: spread_of(&residuals),
        fitted: (S::zero(), all.clone()),
        fit: Some(EnvelopeFit { all, bottom, top, growth }),
        samples,
        threshold: config.growth,
        passed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Confidence {
    /// Every sampled prime gave the same fiber size.
    Consistent,
    /// A strict majority agreed on the largest value.
    Majority,
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::Consistent => "consistent",
            Confidence::Majority => "majority",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeEstimate {
    pub degree: u32,
    pub confidence: Confidence,
    pub per_prime: Vec<(u64, u32)>,
}

fn integral_parts(f: &RatFunc) -> (Poly, Poly) {
    let l = f.num.coefficient_denominator() * f.den.coefficient_denominator();
    let l = Rational::from_integer(l);
    (f.num.scale(&l), f.den.scale(&l))
}

/// Reduction of a component: `Some(None)` is a pole, `None` undefined.
fn reduce_component(parts: &(Poly, Poly), x: Fp, y: Fp) -> Option<Option<Fp>> {
    let n = eval_poly(&parts.0, x, y)?;
    let d = eval_poly(&parts.1, x, y)?;
    match (n.is_zero(), d.is_zero()) {
        (_, false) => Some(Some(n * d.inv()?)),
        (false, true) => Some(None),
        (true, true) => None,
    }
}

/// Largest fiber, over `F_p`, of `P -> sum_i c_i f_i(P)` for each prime.
/// Translations do not change fibers and are ignored.
pub fn fiber_sizes(source: &PlaneCurve, maps: &[(&RationalMap, i64)], primes: &[u64]) -> Result<Vec<(u64, u32)>> {
    let Some((first, _)) = maps.first() else {
        return Err(Error::Input("no maps to combine".into()));
    };
    if maps.iter().any(|(f, _)| f.target != first.target) {
        return Err(Error::Input("maps have different targets".into()));
    }
    let scale = Rational::from_integer(source.equation.coefficient_denominator());
    let equation = source.equation.scale(&scale);
    let parts: Vec<((Poly, Poly), (Poly, Poly), i64)> =
        maps.iter().map(|(f, c)| (integral_parts(&f.u), integral_parts(&f.v), *c)).collect();
    let mut out = Vec::with_capacity(primes.len());
    for &p in primes {
        if !is_small_prime(p) {
            return Err(Error::Input(format!("{p} is not a prime below 2^20")));
        }
        let e = CurveModP::new(&first.target, p)
            .ok_or_else(|| Error::Input(format!("target has bad reduction at {p}")))?;
        let mut images = Vec::new();
        for xv in 0..p {
            for yv in 0..p {
                let (x, y) = (Fp::new(xv, p), Fp::new(yv, p));
                if !eval_poly(&equation, x, y).is_some_and(Fp::is_zero) {
                    continue;
                }
                let mut total = None;
                let mut defined = true;
                for (u, v, c) in &parts {
                    let image = match reduce_component(u, x, y) {
                        None => None,
                        Some(None) => Some(None),
                        Some(Some(uu)) => match reduce_component(v, x, y) {
                            Some(Some(vv)) => Some(Some((uu.v, vv.v))),
                            _ => None,
                        },
                    };
                    match image {
                        Some(pt) => total = e.add(total, e.mul(*c, pt)),
                        None => {
                            defined = false;
                            break;
                        }
                    }
                }
                images.push(if defined { Some(total) } else { None });
            }
        }
        out.push((p, max_fiber(images) as u32));
    }
    Ok(out)
}

/// Degree of `sum_i c_i f_i` from fiber sizes at `>= 3` primes.
pub fn estimate_combination_degree(source: &PlaneCurve, maps: &[(&RationalMap, i64)], primes: &[u64]) -> Result<DegreeEstimate> {
    if primes.len() < 3 {
        return Err(Error::Input("degree estimation needs at least 3 primes".into()));
    }
    let per_prime = fiber_sizes(source, maps, primes)?;
    let best = per_prime.iter().map(|t| t.1).max().unwrap_or(0);
    let hits = per_prime.iter().filter(|t| t.1 == best).count();
    let confidence = if hits == per_prime.len() {
        Confidence::Consistent
    } else if 2 * hits > per_prime.len() {
        Confidence::Majority
    } else {
        return Err(Error::DegreeUnstable(format!("fiber sizes {per_prime:?} disagree")));
    };
    if best == 0 {
        return Err(Error::DegreeUnstable("no affine points with a defined image".into()));
    }
    Ok(DegreeEstimate { degree: best, confidence, per_prime })
}

/// Degree of one map, checked against its declared degree.
pub fn estimate_map_degree(source: &PlaneCurve, map: &RationalMap, primes: &[u64]) -> Result<DegreeEstimate> {
    let est = estimate_combination_degree(source, &[(map, 1)], primes)?;
    if est.degree != map.declared_degree {
        return Err(Error::ModelInconsistency(format!(
            "declared degree {} but fibers mod p have size {}",
            map.declared_degree, est.degree
        )));
    }
    Ok(est)
}

/// `|x|` of a rational, for sorting corpora by size.
pub fn naive_size(q: &Rational) -> BigInt {
    q.numer().abs().max(q.denom().clone())
}
