//! The Manin-Dem'janenko height bound.
//!
//! Given maps `f_1, ..., f_r: X -> E` with `r > rk E(Q)`, the images of any
//! rational point are linearly dependent, so the height pairing matrix
//! `P(a)_ij = h(f_i(a) + f_j(a)) - h(f_i(a)) - h(f_j(a))` is singular. On the
//! other hand `det P(a) = det(P)/deg(L)^r h_L(a)^r + O(1 + h_L(a)^{r-1/2})`
//! with `P` the degree pairing of the maps, which is positive for large
//! `h_L`. This module fits the error constants on a corpus of points over
//! quadratic fields, derives the height bound and enumerates the lattice
//! candidates for the images.
//!
//! Throughout `M = O(2(O))` on the target and `L = (x)_i f_i^* M`, so
//! `deg f^* M = 2 deg f` and `h_L = sum_i h(f_i)`.

pub mod demos;
pub mod quadratic;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::elliptic::{ECPoint, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::height_machine::{estimate_combination_degree, estimate_map_degree, PlaneCurve, RationalMap};
use crate::heights::height_bilinear;
use crate::mordell_weil::{rational_rank, Augmentation, MWBasis};
use crate::scalar::{Precision, Real};
use crate::Rational;
use quadratic::{CurveOverK, KPoint, QuadElt};

/// `r > rank`: enough maps to force dependent images.
pub fn md_criterion(r: usize, rank_a: usize) -> bool {
    r >= 1 && r > rank_a
}

/// `P_ij = deg (f_i + f_j)^* M - deg f_i^* M - deg f_j^* M` and `deg L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreePairing {
    matrix: Vec<Vec<i64>>,
    deg_l: u32,
}

impl DegreePairing {
    pub fn new(matrix: Vec<Vec<i64>>, deg_l: u32) -> Result<Self> {
        let r = matrix.len();
        if r == 0 || matrix.iter().any(|row| row.len() != r) {
            return Err(Error::Input("degree pairing must be a nonempty square matrix".into()));
        }
        if (0..r).any(|i| (0..i).any(|j| matrix[i][j] != matrix[j][i])) {
            return Err(Error::Input("degree pairing is not symmetric".into()));
        }
        if deg_l == 0 {
            return Err(Error::Input("deg L must be positive".into()));
        }
        Ok(DegreePairing { matrix, deg_l })
    }

    /// From `deg f_i` and `deg (f_i + f_j)` for `i < j` (row-major).
    pub fn from_degrees(degrees: &[u32], sums: &[Vec<u32>]) -> Result<Self> {
        let r = degrees.len();
        let mut m = vec![vec![0i64; r]; r];
        for i in 0..r {
            // [2] o f has degree 4 deg f.
            m[i][i] = 4 * degrees[i] as i64;
            for j in i + 1..r {
                let s = *sums.get(i).and_then(|row| row.get(j)).ok_or_else(|| Error::Input(format!("missing deg(f{i} + f{j})")))?;
                let v = 2 * (s as i64 - degrees[i] as i64 - degrees[j] as i64);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        DegreePairing::new(m, degrees.iter().map(|d| 2 * d).sum())
    }

    /// Map degrees and pairwise sums estimated by fiber counts mod `primes`.
    pub fn estimate(source: &PlaneCurve, maps: &[RationalMap], primes: &[u64]) -> Result<Self> {
        let degrees = maps.iter().map(|f| estimate_map_degree(source, f, primes).map(|e| e.degree)).collect::<Result<Vec<_>>>()?;
        let mut sums = vec![vec![0u32; maps.len()]; maps.len()];
        for i in 0..maps.len() {
            for j in i + 1..maps.len() {
                sums[i][j] = estimate_combination_degree(source, &[(&maps[i], 1), (&maps[j], 1)], primes)?.degree;
            }
        }
        DegreePairing::from_degrees(&degrees, &sums)
    }

    pub fn r(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn deg_l(&self) -> u32 {
        self.deg_l
    }

    pub fn determinant(&self) -> Rational {
        let m: Vec<Vec<Rational>> = self.matrix.iter().map(|row| row.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect();
        rational_determinant(m)
    }

    /// `det(P) / deg(L)^r`, the leading coefficient of the asymptotic.
    pub fn leading(&self) -> Rational {
        self.determinant() / Rational::from_integer(BigInt::from(self.deg_l).pow(self.r() as u32))
    }

    pub fn is_positive_definite(&self) -> bool {
        (1..=self.r()).all(|k| {
            let minor = self.matrix[..k].iter().map(|row| row[..k].iter().map(|&v| Rational::from_integer(v.into())).collect()).collect();
            rational_determinant(minor).is_positive()
        })
    }
}

fn rational_determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Rational::zero() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for i in c + 1..n {
            let f = &m[i][c] / &m[c][c];
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= t;
            }
        }
    }
    det
}

/// Determinant by elimination with partial pivoting.
pub fn determinant<S: Real>(m: &[Vec<S>]) -> S {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m.to_vec();
    let mut det = S::one();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap_or(Ordering::Equal)).unwrap();
        if a[p][c].is_zero() {
            return S::zero();
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det = det * a[c][c].clone();
        for i in c + 1..n {
            let f = a[i][c].clone() / a[c][c].clone();
            for j in c..n {
                let t = f.clone() * a[c][j].clone();
                a[i][j] = a[i][j].clone() - t;
            }
        }
    }
    det
}

/// `P(a)_ij = h(R_i + R_j) - h(R_i) - h(R_j)` for rational images.
pub fn height_pairing_matrix<S: Real>(e: &WeierstrassCurve, images: &[ECPoint], prec: Precision) -> Result<Vec<Vec<S>>> {
    let r = images.len();
    let mut m = vec![vec![S::zero(); r]; r];
    for i in 0..r {
        for j in i..r {
            let v = height_bilinear::<S>(e, &images[i], &images[j], prec)?;
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    Ok(m)
}

/// The same over `Q(sqrt d)`.
pub fn height_pairing_matrix_k<S: Real>(k: &CurveOverK, images: &[KPoint], prec: Precision) -> Result<Vec<Vec<S>>> {
    let r = images.len();
    let heights = images.iter().map(|p| k.height::<S>(p, prec)).collect::<Result<Vec<_>>>()?;
    let mut m = vec![vec![S::zero(); r]; r];
    for i in 0..r {
        for j in i..r {
            let s = k.height::<S>(&k.add(&images[i], &images[j]), prec)?;
            let v = s - heights[i].clone() - heights[j].clone();
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    Ok(m)
}

/// A point of `X` over `Q` or over `Q(sqrt d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPoint {
    pub id: String,
    pub d: Option<BigInt>,
    pub x: QuadElt,
    pub y: QuadElt,
}

impl FieldPoint {
    pub fn rational(id: impl Into<String>, x: Rational, y: Rational) -> Self {
        let one = BigInt::one();
        FieldPoint { id: id.into(), d: None, x: QuadElt::rational(x, &one), y: QuadElt::rational(y, &one) }
    }

    pub fn quadratic(id: impl Into<String>, d: BigInt, x: QuadElt, y: QuadElt) -> Result<Self> {
        if x.radicand() != &d || y.radicand() != &d || quadratic::is_square(&d) || d.is_zero() {
            return Err(Error::Input(format!("coordinates are not in Q(sqrt {d})")));
        }
        Ok(FieldPoint { id: id.into(), d: Some(d), x, y })
    }

    pub fn as_rational(&self) -> Option<(Rational, Rational)> {
        (self.x.is_rational() && self.y.is_rational()).then(|| (self.x.a.clone(), self.y.a.clone()))
    }
}

/// `f(a)` for `a` over `Q(sqrt d)`, verified on the target.
pub fn eval_map_k(f: &RationalMap, k: &CurveOverK, x: &QuadElt, y: &QuadElt) -> Result<KPoint> {
    let d = &k.d;
    let lift = |c: &Rational| QuadElt::rational(c.clone(), d);
    let part = |g: &crate::height_machine::RatFunc| -> Result<QuadElt> {
        let num = g.num.eval_in(x, y, &lift);
        let den = g.den.eval_in(x, y, &lift);
        let inv = den.inv().ok_or_else(|| Error::Indeterminate(format!("({x}, {y})")))?;
        Ok(num * inv)
    };
    let p = KPoint::Affine { x: part(&f.u)?, y: part(&f.v)? };
    if !k.contains(&p) {
        return Err(Error::ModelInconsistency(format!("image {p} is not on {}", f.target)));
    }
    Ok(k.add(&p, &KPoint::from_rational(&f.translation, d)))
}

/// Pass window for the top-tercile ratios and the cutoff rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MdConfig {
    /// Ratios in the top tercile must lie in `[1 - w, 1 + w]`.
    pub ratio_window: f64,
}

impl Default for MdConfig {
    fn default() -> Self {
        MdConfig { ratio_window: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct DetSample<S> {
    pub id: String,
    pub h_l: S,
    pub det: S,
    pub residual: S,
    /// `det P(a) / (lead h_L^r)`, above the cutoff only.
    pub ratio: Option<S>,
    /// The images were decomposed and found dependent, so `det = 0` exactly.
    pub exact_zero: bool,
}

#[derive(Clone, Debug)]
pub struct DetReport<S> {
    pub samples: Vec<DetSample<S>>,
    pub skipped: Vec<(String, String)>,
    pub cutoff: S,
    pub leading: Rational,
    pub c0: S,
    pub c1: S,
    pub top_tercile: Vec<String>,
    pub passed: bool,
}

struct Evaluated<S> {
    h_l: S,
    det: S,
    exact_zero: bool,
}

fn same_target(maps: &[RationalMap]) -> Result<&WeierstrassCurve> {
    let first = &maps.first().ok_or_else(|| Error::Input("no maps".into()))?.target;
    if maps.iter().any(|f| &f.target != first) {
        return Err(Error::Input("maps to different elliptic curves are not supported".into()));
    }
    Ok(first)
}

fn evaluate_point<S: Real>(
    maps: &[RationalMap],
    target: &WeierstrassCurve,
    basis: Option<&MWBasis<S>>,
    pt: &FieldPoint,
    prec: Precision,
) -> Result<Evaluated<S>> {
    let Some(d) = &pt.d else {
        let (x, y) = pt.as_rational().expect("rational point");
        let images = maps.iter().map(|f| f.eval(&x, &y)).collect::<Result<Vec<_>>>()?;
        let mut h_l = S::zero();
        for p in &images {
            h_l = h_l + crate::heights::canonical_height::<S>(target, p, prec)?;
        }
        if let Some(b) = basis {
            let coords = images.iter().map(|p| b.decompose(p)).collect::<Result<Vec<Augmentation>>>()?;
            if rational_rank(&coords) < images.len() {
                return Ok(Evaluated { h_l, det: S::zero(), exact_zero: true });
            }
        }
        let det = determinant(&height_pairing_matrix::<S>(target, &images, prec)?);
        return Ok(Evaluated { h_l, det, exact_zero: false });
    };
    let k = CurveOverK::new(target, d.clone())?;
    let images = maps.iter().map(|f| eval_map_k(f, &k, &pt.x, &pt.y)).collect::<Result<Vec<_>>>()?;
    let mut h_l = S::zero();
    for p in &images {
        h_l = h_l + k.height::<S>(p, prec)?;
    }
    let det = determinant(&height_pairing_matrix_k::<S>(&k, &images, prec)?);
    Ok(Evaluated { h_l, det, exact_zero: false })
}

fn power<S: Real>(h: &S, r: usize) -> S {
    (0..r).fold(S::one(), |acc, _| acc * h.clone())
}

/// `1 + h^{r - 1/2}`.
fn envelope<S: Real>(h: &S, r: usize, prec: Precision) -> S {
    let h = if *h < S::zero() { S::zero() } else { h.clone() };
    S::from_i64_in(1, prec) + power(&h, r - 1) * h.sqrt()
}

/// Fits `|det P(a) - lead h_L(a)^r| <= C0 + C1 (1 + h_L^{r-1/2})` on a corpus.
///
/// `C1` is fitted on points above the cutoff (the median height) and `C0`
/// absorbs what remains below it, so the inequality holds on every sample.
pub fn det_asymptotic_check<S: Real>(
    pairing: &DegreePairing,
    maps: &[RationalMap],
    basis: Option<&MWBasis<S>>,
    corpus: &[FieldPoint],
    config: &MdConfig,
    prec: Precision,
) -> Result<DetReport<S>> {
    if corpus.is_empty() {
        return Err(Error::Input("empty corpus".into()));
    }
    if pairing.r() != maps.len() {
        return Err(Error::Input(format!("{} maps but a {}x{} degree pairing", maps.len(), pairing.r(), pairing.r())));
    }
    let target = same_target(maps)?;
    let r = maps.len();
    let leading = pairing.leading();
    let lead = S::from_rational_in(&leading, prec);
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for pt in corpus {
        match evaluate_point(maps, target, basis, pt, prec) {
            Ok(ev) => {
                let residual = ev.det.clone() - lead.clone() * power(&ev.h_l, r);
                samples.push(DetSample { id: pt.id.clone(), h_l: ev.h_l, det: ev.det, residual, ratio: None, exact_zero: ev.exact_zero });
            }
            Err(Error::Indeterminate(why)) => skipped.push((pt.id.clone(), format!("indeterminate at {why}"))),
            Err(e) => return Err(e),
        }
    }
    if samples.is_empty() {
        return Err(Error::InsufficientHeightRange("no corpus point has defined images".into()));
    }
    samples.sort_by(|a, b| a.h_l.partial_cmp(&b.h_l).unwrap_or(Ordering::Equal).then_with(|| a.id.cmp(&b.id)));
    let cutoff = samples[(samples.len() - 1) / 2].h_l.clone();
    let above: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].h_l > cutoff).collect();
    if above.is_empty() {
        return Err(Error::InsufficientHeightRange(format!("no corpus height exceeds the cutoff {}", cutoff.to_f64())));
    }
    let mut c1 = S::zero();
    for &i in &above {
        let s = &mut samples[i];
        s.ratio = Some(s.det.clone() / (lead.clone() * power(&s.h_l, r)));
        c1 = c1.max_of(s.residual.abs() / envelope(&s.h_l, r, prec));
    }
    let mut c0 = S::zero();
    for s in &samples {
        let excess = s.residual.abs() - c1.clone() * envelope(&s.h_l, r, prec);
        c0 = c0.max_of(excess);
    }
    let top_start = samples.len() - samples.len().div_ceil(3);
    let w = config.ratio_window;
    let passed = samples[top_start..].iter().all(|s| {
        s.ratio.as_ref().is_some_and(|q| {
            let q = q.to_f64();
            (1.0 - w..=1.0 + w).contains(&q)
        })
    });
    let top_tercile = samples[top_start..].iter().map(|s| s.id.clone()).collect();
    Ok(DetReport { samples, skipped, cutoff, leading, c0, c1, top_tercile, passed })
}

/// Smallest `B` with `lead h^r - C1 (1 + h^{r-1/2}) - C0 > 0` for all `h > B`.
///
/// Dividing by `h^{r-1/2}` gives `lead h^{1/2} - C1 - (C0 + C1) h^{1/2-r}`,
/// increasing in `h`, so the root is unique and bisection is monotone.
pub fn md_bound<S: Real>(pairing: &DegreePairing, c0: &S, c1: &S, prec: Precision) -> Result<S> {
    let leading = pairing.leading();
    if !leading.is_positive() {
        return Err(Error::Input(format!("det P = {} is not positive", pairing.determinant())));
    }
    bound_from_leading(&S::from_rational_in(&leading, prec), pairing.r(), c0, c1, prec)
}

pub(crate) fn bound_from_leading<S: Real>(lead: &S, r: usize, c0: &S, c1: &S, prec: Precision) -> Result<S> {
    if *c0 < S::zero() || *c1 < S::zero() {
        return Err(Error::Input("fitted constants must be nonnegative".into()));
    }
    if c0.is_zero() && c1.is_zero() {
        return Ok(S::zero());
    }
    let g = |h: &S| lead.clone() * power(h, r) - c1.clone() * envelope(h, r, prec) - c0.clone();
    let mut lo = S::zero();
    let mut hi = S::one();
    while g(&hi) <= S::zero() {
        lo = hi.clone();
        hi = hi.clone() + hi.clone();
        if hi.to_f64() > 1e300 {
            return Err(Error::Domain("bound search diverged".into()));
        }
    }
    let two = S::from_i64_in(2, prec);
    let tol = S::from_f64_in(10f64.powi(-(crate::scalar::effective_digits::<S>(prec) as i32).min(300)), prec);
    for _ in 0..4 * (prec.working_bits() as usize).min(2000) {
        if hi.clone() - lo.clone() <= tol.clone() * hi.clone() {
            break;
        }
        let mid = (lo.clone() + hi.clone()) / two.clone();
        if g(&mid) > S::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A Manin-Dem'janenko system: a curve with its known rational points, maps
/// to one elliptic curve, a Mordell-Weil basis there, the degree pairing and
/// a corpus of extra points for fitting.
#[derive(Clone, Debug)]
pub struct MdSystem {
    pub label: String,
    pub curve: PlaneCurve,
    pub maps: Vec<RationalMap>,
    pub generators: Vec<ECPoint>,
    pub pairing: DegreePairing,
    pub corpus: Vec<FieldPoint>,
    /// Candidates are searched in `(1/n) E(Q)/tors`.
    pub scaling: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Bound<S> {
    Finite(S),
    NotDerivable(String),
}

#[derive(Clone, Debug)]
pub struct ImageCheck {
    pub id: String,
    pub coords: Vec<Augmentation>,
    pub contained: bool,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct MdReport<S> {
    pub label: String,
    pub criterion_ok: bool,
    pub rank_a: usize,
    pub r: usize,
    pub det_pairing: Rational,
    pub deg_l: u32,
    pub det_check: Option<DetReport<S>>,
    pub bound: Bound<S>,
    /// Bound on `h(f_i(a))` for every map; `h_L` is the sum of these.
    pub image_bound: Option<S>,
    pub candidates: Vec<Augmentation>,
    pub rational_images: Vec<ImageCheck>,
    /// Every rational-point image is a candidate and the images are dependent.
    pub sound: bool,
    pub errors: Vec<String>,
}

/// Runs the whole pipeline. Only an invalid basis is an error; failures of
/// later stages are recorded in the report.
pub fn md_report<S: Real>(system: &MdSystem, config: &MdConfig, prec: Precision) -> Result<MdReport<S>> {
    let target = same_target(&system.maps)?.clone();
    let basis = MWBasis::<S>::new(target, system.generators.clone(), prec)?;
    let rank_a = basis.rank();
    let r = system.maps.len();
    let mut report = MdReport {
        label: system.label.clone(),
        criterion_ok: md_criterion(r, rank_a),
        rank_a,
        r,
        det_pairing: system.pairing.determinant(),
        deg_l: system.pairing.deg_l(),
        det_check: None,
        bound: Bound::NotDerivable(String::new()),
        image_bound: None,
        candidates: Vec::new(),
        rational_images: Vec::new(),
        sound: false,
        errors: Vec::new(),
    };
    if !report.criterion_ok {
        report.bound = Bound::NotDerivable(format!("{r} maps do not exceed rank {rank_a}"));
        return Ok(report);
    }
    if !system.pairing.is_positive_definite() {
        report.bound = Bound::NotDerivable("degree pairing is not positive definite".into());
        return Ok(report);
    }
    let rational: Vec<FieldPoint> =
        system.curve.points.iter().map(|p| FieldPoint::rational(p.id.clone(), p.x.clone(), p.y.clone())).collect();
    let fit_corpus: Vec<FieldPoint> = system.corpus.iter().cloned().chain(rational).collect();
    let check = match det_asymptotic_check(&system.pairing, &system.maps, Some(&basis), &fit_corpus, config, prec) {
        Ok(c) => c,
        Err(e) => {
            report.bound = Bound::NotDerivable(e.to_string());
            report.errors.push(format!("asymptotic check: {e}"));
            return Ok(report);
        }
    };
    let bound = match md_bound(&system.pairing, &check.c0, &check.c1, prec) {
        Ok(b) => b,
        Err(e) => {
            report.bound = Bound::NotDerivable(e.to_string());
            report.errors.push(format!("bound: {e}"));
            report.det_check = Some(check);
            return Ok(report);
        }
    };
    report.det_check = Some(check);
    // h_L = sum_i h(f_i) with nonnegative terms, so each image obeys the bound.
    let image_bound = bound.clone();
    match basis.enumerate_bounded(&image_bound, system.scaling) {
        Ok(c) => report.candidates = c,
        Err(e) => report.errors.push(format!("enumeration: {e}")),
    }
    report.bound = Bound::Finite(bound);
    report.image_bound = Some(image_bound);
    let mut sound = report.errors.is_empty();
    for p in &system.curve.points {
        let images: Result<Vec<ECPoint>> = system.maps.iter().map(|f| f.eval(&p.x, &p.y)).collect();
        let images = match images {
            Ok(i) => i,
            Err(Error::Indeterminate(_)) => continue,
            Err(e) => {
                report.errors.push(format!("image of {}: {e}", p.id));
                sound = false;
                continue;
            }
        };
        match images.iter().map(|q| basis.decompose(q)).collect::<Result<Vec<_>>>() {
            Ok(coords) => {
                let contained = coords.iter().all(|c| report.candidates.binary_search(c).is_ok());
                let rank = rational_rank(&coords);
                sound &= contained && rank <= rank_a;
                report.rational_images.push(ImageCheck { id: p.id.clone(), coords, contained, rank });
            }
            Err(e) => {
                report.errors.push(format!("decomposing images of {}: {e}", p.id));
                sound = false;
            }
        }
    }
    report.sound = sound;
    Ok(report)
}

/// Largest absolute coordinate among candidates, for summaries.
pub fn candidate_span(candidates: &[Augmentation]) -> i64 {
    candidates
        .iter()
        .flat_map(|a| a.coords.iter())
        .map(|c| c.abs().ceil().to_integer().to_i64().unwrap_or(i64::MAX))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests;
