//! Mordell-Weil lattices: bases with their height Gram matrix, coordinates of
//! points in `A(Q) (x) Q`, the quadratic extension of the canonical height and
//! bounded-height enumeration of the scaled lattice `(1/n) Z^r`.
//!
//! Gram entries use the pairing `b(P, Q) = h(P + Q) - h(P) - h(Q)`, so the
//! diagonal is `2 h(P_i)` and the height of coordinates `a` is `a^T G a / 2`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::factor;
use crate::elliptic::{ECPoint, TorsionSubgroup, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::heights::{canonical_height, height_bilinear};
use crate::scalar::{effective_digits, Precision, Real};
use crate::{Float, Rational};

/// Default largest denominator tried when rounding coordinates.
pub const DEFAULT_DENOMINATOR_BOUND: u32 = 24;

/// An element of `A(Q) (x) Q` in coordinates over a basis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Augmentation {
    pub coords: Vec<Rational>,
}

impl Augmentation {
    pub fn new(coords: Vec<Rational>) -> Self {
        Augmentation { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Augmentation { coords: vec![Rational::zero(); rank] }
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut a = Self::zero(rank);
        a.coords[i] = Rational::one();
        a
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Augmentation { coords: c.iter().map(|&v| Rational::from_integer(v.into())).collect() }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Augmentation { coords: self.coords.iter().map(|x| x * c).collect() }
    }

    /// Concatenation, for points of a product.
    pub fn concat(&self, other: &Augmentation) -> Self {
        Augmentation { coords: self.coords.iter().chain(&other.coords).cloned().collect() }
    }

    /// Least `n` with `n * a` integral.
    pub fn denominator(&self) -> BigInt {
        self.coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

impl Add for &Augmentation {
    type Output = Augmentation;
    fn add(self, rhs: &Augmentation) -> Augmentation {
        assert_eq!(self.rank(), rhs.rank(), "augmentations of different rank");
        Augmentation { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Neg for &Augmentation {
    type Output = Augmentation;
    fn neg(self) -> Augmentation {
        Augmentation { coords: self.coords.iter().map(|a| -a).collect() }
    }
}

impl Sub for &Augmentation {
    type Output = Augmentation;
    fn sub(self, rhs: &Augmentation) -> Augmentation {
        self + &(-rhs)
    }
}

impl fmt::Display for Augmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// `a` lies in `(1/n) Z^r`.
pub fn in_scaled_lattice(a: &Augmentation, n: u32) -> bool {
    let n = BigInt::from(n);
    a.coords.iter().all(|c| (c * &n).is_integer())
}

/// Rank over Q of a list of coordinate vectors, by exact elimination.
pub fn rational_rank(vectors: &[Augmentation]) -> usize {
    let mut rows: Vec<Vec<Rational>> = vectors.iter().map(|v| v.coords.clone()).collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(rank, pivot);
        for i in 0..rows.len() {
            if i != rank && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[rank][c];
                for k in c..cols {
                    let d = &f * &rows[rank][k];
                    rows[i][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Generators on one factor of a product of elliptic curves.
#[derive(Clone, Debug)]
pub struct BasisBlock {
    pub curve: WeierstrassCurve,
    pub generators: Vec<ECPoint>,
    pub torsion: Arc<TorsionSubgroup>,
}

/// A Mordell-Weil basis over a product of elliptic curves. The Gram matrix is
/// block diagonal: points on different factors pair to zero.
#[derive(Clone, Debug)]
pub struct MWBasis<S: Real = Float> {
    blocks: Vec<BasisBlock>,
    gram: Vec<Vec<S>>,
    precision: Precision,
    denominator_bound: u32,
}

impl<S: Real> MWBasis<S> {
    pub fn new(curve: WeierstrassCurve, generators: Vec<ECPoint>, prec: Precision) -> Result<Self> {
        Self::product(vec![(curve, generators)], prec)
    }

    /// Validates the generators and certifies independence through the
    /// leading minors of the Gram matrix.
    pub fn product(factors: Vec<(WeierstrassCurve, Vec<ECPoint>)>, prec: Precision) -> Result<Self> {
        let mut blocks = Vec::with_capacity(factors.len());
        for (curve, generators) in factors {
            for p in &generators {
                curve.check_point(p)?;
                if curve.is_torsion(p)? {
                    return Err(Error::InvalidBasis(format!("generator {p} is torsion")));
                }
            }
            let torsion = curve.torsion_subgroup()?;
            blocks.push(BasisBlock { curve, generators, torsion });
        }
        let rank: usize = blocks.iter().map(|b| b.generators.len()).sum();
        let mut gram = vec![vec![S::zero(); rank]; rank];
        let mut offset = 0;
        for b in &blocks {
            let heights: Vec<S> = b.generators.iter().map(|p| canonical_height::<S>(&b.curve, p, prec)).collect::<Result<_>>()?;
            for i in 0..b.generators.len() {
                gram[offset + i][offset + i] = S::from_i64_in(2, prec) * heights[i].clone();
                for j in 0..i {
                    let sum = b.curve.add(&b.generators[i], &b.generators[j])?;
                    let v = canonical_height::<S>(&b.curve, &sum, prec)? - heights[i].clone() - heights[j].clone();
                    gram[offset + i][offset + j] = v.clone();
                    gram[offset + j][offset + i] = v;
                }
            }
            offset += b.generators.len();
        }
        cholesky(&gram, effective_digits::<S>(prec)).map_err(|e| match e {
            Error::Input(msg) => Error::InvalidBasis(msg),
            other => other,
        })?;
        Ok(MWBasis { blocks, gram, precision: prec, denominator_bound: DEFAULT_DENOMINATOR_BOUND })
    }

    pub fn with_denominator_bound(mut self, bound: u32) -> Self {
        self.denominator_bound = bound.max(1);
        self
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn blocks(&self) -> &[BasisBlock] {
        &self.blocks
    }

    pub fn gram(&self) -> &[Vec<S>] {
        &self.gram
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn denominator_bound(&self) -> u32 {
        self.denominator_bound
    }

    /// Product of the pivots of the Gram matrix.
    pub fn regulator(&self) -> S {
        let l = cholesky(&self.gram, effective_digits::<S>(self.precision)).expect("checked at construction");
        l.iter().enumerate().fold(S::from_i64_in(1, self.precision), |acc, (i, row)| acc * row[i].clone() * row[i].clone())
    }

    fn single_block(&self) -> Result<&BasisBlock> {
        match self.blocks.as_slice() {
            [b] => Ok(b),
            _ => Err(Error::Input(format!("basis has {} factors, expected one", self.blocks.len()))),
        }
    }

    /// `sum a_i P_i` on a one-factor basis.
    pub fn combine(&self, a: &[i64]) -> Result<ECPoint> {
        let b = self.single_block()?;
        b.curve.combine(a, &b.generators)
    }

    pub fn decompose(&self, p: &ECPoint) -> Result<Augmentation> {
        let b = self.single_block()?;
        self.decompose_block(b, 0, p)
    }

    /// Coordinates of a point of the product, one point per factor.
    pub fn decompose_tuple(&self, points: &[ECPoint]) -> Result<Augmentation> {
        if points.len() != self.blocks.len() {
            return Err(Error::Input(format!("{} points for {} factors", points.len(), self.blocks.len())));
        }
        let mut out = Augmentation::zero(0);
        let mut offset = 0;
        for (b, p) in self.blocks.iter().zip(points) {
            out = out.concat(&self.decompose_block(b, offset, p)?);
            offset += b.generators.len();
        }
        Ok(out)
    }

    fn decompose_block(&self, b: &BasisBlock, offset: usize, p: &ECPoint) -> Result<Augmentation> {
        b.curve.check_point(p)?;
        let r = b.generators.len();
        if r == 0 {
            return if b.torsion.contains(p) { Ok(Augmentation::zero(0)) } else { Err(Error::OutsideLattice) };
        }
        let prec = self.precision;
        let rhs: Vec<S> = b.generators.iter().map(|g| height_bilinear::<S>(&b.curve, p, g, prec)).collect::<Result<_>>()?;
        let g: Vec<Vec<S>> = (0..r).map(|i| self.gram[offset + i][offset..offset + r].to_vec()).collect();
        let c = cholesky_solve(&g, &rhs, effective_digits::<S>(prec))?;
        let c: Vec<f64> = c.iter().map(Real::to_f64).collect();
        let tol = 10f64.powf(-(effective_digits::<S>(prec) as f64) / 3.0);
        for n in 1..=self.denominator_bound {
            let scaled: Vec<f64> = c.iter().map(|x| x * n as f64).collect();
            if scaled.iter().any(|x| f64::abs(x - x.round()) > tol * (1.0 + f64::abs(*x))) {
                continue;
            }
            let m: Vec<i64> = scaled.iter().map(|x| x.round() as i64).collect();
            let np = b.curve.scalar_mul(n as i64, p)?;
            let residual = b.curve.sub(&np, &b.curve.combine(&m, &b.generators)?)?;
            if !b.curve.is_torsion(&residual)? {
                return Err(Error::OutsideLattice);
            }
            let n = BigInt::from(n);
            return Ok(Augmentation { coords: m.into_iter().map(|v| Rational::new(v.into(), n.clone())).collect() });
        }
        Err(Error::OutsideLattice)
    }

    /// `a^T G a / 2`: the canonical height extended to `A(Q) (x) Q`.
    pub fn qf_height(&self, a: &Augmentation) -> S {
        quadratic_form(&self.gram, a, self.precision)
    }

    /// All `a` in `(1/n) Z^r` with `qf_height(a) <= bound`, sorted.
    pub fn enumerate_bounded(&self, bound: &S, n: u32) -> Result<Vec<Augmentation>> {
        enumerate_gram(&self.gram, bound, n, self.precision)
    }
}

/// `a^T G a / 2`.
pub fn quadratic_form<S: Real>(gram: &[Vec<S>], a: &Augmentation, prec: Precision) -> S {
    let v: Vec<S> = a.coords.iter().map(|c| S::from_rational_in(c, prec)).collect();
    let mut total = S::zero();
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            total = total + g.clone() * v[i].clone() * v[j].clone();
        }
    }
    total / S::from_i64_in(2, prec)
}

/// Lower triangular `L` with `G = L L^T`. Every pivot must exceed
/// `10^-(digits/2)` times its diagonal entry, which certifies that all
/// leading minors are positive.
pub fn cholesky<S: Real>(gram: &[Vec<S>], digits: u32) -> Result<Vec<Vec<S>>> {
    let r = gram.len();
    let tol = 10f64.powf(-(digits as f64) / 2.0);
    let mut l = vec![vec![S::zero(); r]; r];
    for i in 0..r {
        if gram[i].len() != r {
            return Err(Error::Input("Gram matrix is not square".into()));
        }
        for j in 0..=i {
            if (gram[i][j].clone() - gram[j][i].clone()).abs().to_f64() > tol * (1.0 + gram[i][j].abs().to_f64()) {
                return Err(Error::Input("Gram matrix is not symmetric".into()));
            }
            let mut s = gram[i][j].clone();
            for k in 0..j {
                s = s - l[i][k].clone() * l[j][k].clone();
            }
            if i == j {
                if s.to_f64() <= tol * gram[i][i].abs().to_f64() || !(s > S::zero()) {
                    return Err(Error::Input(format!("leading minor {} is not positive", i + 1)));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j].clone();
            }
        }
    }
    Ok(l)
}

fn cholesky_solve<S: Real>(gram: &[Vec<S>], rhs: &[S], digits: u32) -> Result<Vec<S>> {
    let l = cholesky(gram, digits)?;
    let r = rhs.len();
    let mut y = vec![S::zero(); r];
    for i in 0..r {
        let mut s = rhs[i].clone();
        for k in 0..i {
            s = s - l[i][k].clone() * y[k].clone();
        }
        y[i] = s / l[i][i].clone();
    }
    let mut x = vec![S::zero(); r];
    for i in (0..r).rev() {
        let mut s = y[i].clone();
        for k in i + 1..r {
            s = s - l[k][i].clone() * x[k].clone();
        }
        x[i] = s / l[i][i].clone();
    }
    Ok(x)
}

/// Fincke-Pohst enumeration of `{a in (1/n) Z^r : a^T G a / 2 <= bound}`.
///
/// The ellipsoid is traversed in `f64` with a slightly enlarged radius; every
/// hit is then re-checked in `S`, so membership is decided at full precision.
pub fn enumerate_gram<S: Real>(gram: &[Vec<S>], bound: &S, n: u32, prec: Precision) -> Result<Vec<Augmentation>> {
    if n == 0 {
        return Err(Error::Input("lattice scaling must be positive".into()));
    }
    if *bound < S::zero() {
        return Err(Error::Input("height bound must be nonnegative".into()));
    }
    let r = gram.len();
    cholesky(gram, effective_digits::<S>(prec))?;
    if r == 0 {
        return Ok(vec![Augmentation::zero(0)]);
    }
    // q_ii and q_ij with z^T G z = sum_i q_ii (z_i + sum_{j>i} q_ij z_j)^2.
    let g: Vec<Vec<f64>> = gram.iter().map(|row| row.iter().map(Real::to_f64).collect()).collect();
    let mut q = g.clone();
    for i in 0..r {
        for j in i + 1..r {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..r {
            for l in k..r {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    let target = 2.0 * bound.to_f64() * (n as f64).powi(2);
    let target = target * (1.0 + 1e-9) + 1e-9;
    let nb = BigInt::from(n);
    let mut out = Vec::new();
    let mut z = vec![0i64; r];
    fp_level(&q, r - 1, target, &mut z, &mut |z: &[i64]| {
        let a = Augmentation { coords: z.iter().map(|&v| Rational::new(v.into(), nb.clone())).collect() };
        if quadratic_form(gram, &a, prec) <= *bound {
            out.push(a);
        }
    });
    out.sort();
    Ok(out)
}

fn fp_level(q: &[Vec<f64>], i: usize, remaining: f64, z: &mut [i64], emit: &mut dyn FnMut(&[i64])) {
    let r = q.len();
    let center = -(i + 1..r).map(|j| q[i][j] * z[j] as f64).sum::<f64>();
    let radius = (remaining.max(0.0) / q[i][i]).sqrt();
    let lo = (center - radius).ceil() as i64;
    let hi = (center + radius).floor() as i64;
    for v in lo..=hi {
        z[i] = v;
        let d = v as f64 - center;
        let rest = remaining - q[i][i] * d * d;
        if rest < -1e-12 * remaining.abs().max(1.0) {
            continue;
        }
        if i == 0 {
            emit(z);
        } else {
            fp_level(q, i - 1, rest, z, emit);
        }
    }
    z[i] = 0;
}

/// The exponent `4 rad(c)^2 c^2 #tors` killing the Kummer kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KummerExponent {
    pub value: BigUint,
    /// The `c` actually used: odd input is doubled.
    pub c: BigUint,
    pub doubled: bool,
}

pub fn kummer_exponent(c: &BigUint, torsion_order: u32, factor_bound: u64) -> Result<KummerExponent> {
    if c.is_zero() || torsion_order == 0 {
        return Err(Error::Input("kummer exponent needs positive c and torsion order".into()));
    }
    let doubled = c.is_odd();
    let c = if doubled { c * 2u32 } else { c.clone() };
    let rad: BigUint = factor(&c, factor_bound)?.into_iter().map(|(p, _)| p).product();
    let value = BigUint::from(4u32) * &rad * &rad * &c * &c * BigUint::from(torsion_order);
    Ok(KummerExponent { value, c, doubled })
}

/// Integer vector of an augmentation known to be integral.
pub fn integral_coords(a: &Augmentation) -> Option<Vec<i64>> {
    a.coords.iter().map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None }).collect()
}

/// Largest `|a_i|`, for reporting.
pub fn max_abs_coord(a: &Augmentation) -> Rational {
    a.coords.iter().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P50: Precision = Precision(50);

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn basis(label: &str) -> MWBasis {
        let c = corpus::curve(label);
        MWBasis::new(c.curve, c.generators, P50).unwrap()
    }

    #[test]
    fn scaled_lattice_membership() {
        assert!(in_scaled_lattice(&Augmentation::from_ints(&[3, -2]), 5));
        let a = Augmentation::new(vec![q(1, 3), q(0, 1)]);
        assert!(in_scaled_lattice(&a, 3));
        assert!(!in_scaled_lattice(&a, 2));
        assert!(in_scaled_lattice(&Augmentation::zero(4), 7));
    }

    #[test]
    fn kummer_values() {
        let k = |c: u32, t| kummer_exponent(&BigUint::from(c), t, 1000).unwrap();
        assert_eq!(k(2, 1).value, BigUint::from(64u32));
        assert_eq!(k(2, 4).value, BigUint::from(256u32));
        assert_eq!(k(6, 1).value, BigUint::from(5184u32));
        let odd = k(3, 1);
        assert!(odd.doubled);
        assert_eq!(odd.c, BigUint::from(6u32));
        assert_eq!(odd.value, BigUint::from(5184u32));
        // rad(12) = 6: 4 * 36 * 144.
        assert_eq!(k(12, 2).value, BigUint::from(4u32 * 36 * 144 * 2));
    }

    #[test]
    fn rational_rank_by_elimination() {
        let v = |c: &[i64]| Augmentation::from_ints(c);
        assert_eq!(rational_rank(&[v(&[1, 2]), v(&[2, 4])]), 1);
        assert_eq!(rational_rank(&[v(&[1, 2]), v(&[0, 1])]), 2);
        assert_eq!(rational_rank(&[v(&[0, 0])]), 0);
        assert_eq!(rational_rank(&[v(&[1, 0, 1]), v(&[0, 1, 1]), v(&[1, 1, 2])]), 2);
    }

    #[test]
    fn gram_is_symmetric_positive_and_matches_heights() {
        let b = basis("5077a1");
        let c = corpus::curve("5077a1");
        let g = b.gram();
        for i in 0..3 {
            let h = canonical_height::<Float>(&c.curve, &c.generators[i], P50).unwrap();
            assert!((&g[i][i] - &(Float::from_int(2, 200) * h)).abs().to_f64() < 1e-45);
            for j in 0..3 {
                assert_eq!(g[i][j], g[j][i]);
            }
        }
        // Regulator of 5077a1 in the usual normalization is 0.417143558758384;
        // our pairing is twice that one, so det G = 8 * reg.
        let reg = b.regulator().to_f64() / 8.0;
        assert!((reg - 0.417143558758384).abs() < 1e-12, "{reg}");
    }

    #[test]
    fn dependent_or_torsion_generators_rejected() {
        let c = corpus::curve("37a1");
        let p = c.generators[0].clone();
        let two_p = c.curve.double(&p).unwrap();
        let err = MWBasis::<Float>::new(c.curve.clone(), vec![p.clone(), two_p], P50).unwrap_err();
        assert!(matches!(err, Error::InvalidBasis(_)), "{err:?}");
        let e = WeierstrassCurve::from_ints(0, 0, 0, 0, 1).unwrap();
        let t = ECPoint::affine(q(2, 1), q(3, 1));
        assert!(matches!(MWBasis::<f64>::new(e, vec![t], P50), Err(Error::InvalidBasis(_))));
        let err = MWBasis::<f64>::new(c.curve, vec![ECPoint::affine(q(2, 1), q(3, 1))], P50).unwrap_err();
        assert_eq!(err, Error::NotOnCurve);
    }

    #[test]
    fn decompose_examples() {
        let b = basis("389a1");
        let c = corpus::curve("389a1");
        assert_eq!(b.decompose(&c.generators[0]).unwrap(), Augmentation::unit(2, 0));
        let p = c.curve.combine(&[2, -1], &c.generators).unwrap();
        assert_eq!(b.decompose(&p).unwrap(), Augmentation::from_ints(&[2, -1]));
        assert_eq!(b.decompose(&ECPoint::Infinity).unwrap(), Augmentation::zero(2));

        let e = WeierstrassCurve::from_ints(0, 0, 0, 0, 1).unwrap();
        let b0 = MWBasis::<Float>::new(e, vec![], P50).unwrap();
        assert_eq!(b0.decompose(&ECPoint::affine(q(2, 1), q(3, 1))).unwrap(), Augmentation::zero(0));
    }

    #[test]
    fn torsion_shifts_do_not_change_coordinates() {
        // y^2 = x^3 - 25x: rank 1 with full 2-torsion.
        let e = WeierstrassCurve::from_ints(0, 0, 0, -25, 0).unwrap();
        let g = ECPoint::affine(q(-4, 1), q(6, 1));
        let b = MWBasis::<Float>::new(e.clone(), vec![g.clone()], P50).unwrap();
        for t in [ECPoint::affine(q(0, 1), q(0, 1)), ECPoint::affine(q(5, 1), q(0, 1)), ECPoint::Infinity] {
            let p = e.add(&e.scalar_mul(3, &g).unwrap(), &t).unwrap();
            assert_eq!(b.decompose(&p).unwrap(), Augmentation::from_ints(&[3]));
            assert_eq!(b.decompose(&t).unwrap(), Augmentation::zero(1));
        }
    }

    #[test]
    fn unsaturated_basis_gives_fractions_and_foreign_points_fail() {
        let c = corpus::curve("37a1");
        let p = c.generators[0].clone();
        let two_p = c.curve.double(&p).unwrap();
        let b = MWBasis::<Float>::new(c.curve.clone(), vec![two_p], P50).unwrap();
        assert_eq!(b.decompose(&p).unwrap(), Augmentation::new(vec![q(1, 2)]));
        let five = c.curve.scalar_mul(5, &p).unwrap();
        assert_eq!(b.decompose(&five).unwrap(), Augmentation::new(vec![q(5, 2)]));

        let c = corpus::curve("389a1");
        let b = MWBasis::<Float>::new(c.curve.clone(), vec![c.generators[0].clone()], P50).unwrap();
        assert_eq!(b.decompose(&c.generators[1]).unwrap_err(), Error::OutsideLattice);

        let tiny = MWBasis::<Float>::new(corpus::curve("37a1").curve, vec![corpus::curve("37a1").curve.scalar_mul(25, &p).unwrap()], P50)
            .unwrap()
            .with_denominator_bound(24);
        assert_eq!(tiny.decompose(&p).unwrap_err(), Error::OutsideLattice);
    }

    #[test]
    fn product_basis_is_block_diagonal() {
        let a = corpus::curve("37a1");
        let c = corpus::curve("389a1");
        let b = MWBasis::<Float>::product(vec![(a.curve.clone(), a.generators.clone()), (c.curve.clone(), c.generators.clone())], P50).unwrap();
        assert_eq!(b.rank(), 3);
        assert!(b.gram()[0][1].is_zero() && b.gram()[2][0].is_zero());
        let pts = [a.curve.scalar_mul(3, &a.generators[0]).unwrap(), c.curve.combine(&[-1, 2], &c.generators).unwrap()];
        assert_eq!(b.decompose_tuple(&pts).unwrap(), Augmentation::from_ints(&[3, -1, 2]));
        assert!(b.decompose(&pts[0]).is_err());
    }

    #[test]
    fn quadratic_extension_of_height() {
        let b = basis("37a1");
        let h = canonical_height::<Float>(&corpus::curve("37a1").curve, &corpus::curve("37a1").generators[0], P50).unwrap();
        assert!(b.qf_height(&Augmentation::zero(1)).is_zero());
        assert!((b.qf_height(&Augmentation::unit(1, 0)) - h.clone()).abs().to_f64() < 1e-45);
        let half = Augmentation::new(vec![q(1, 2)]);
        assert!((b.qf_height(&half) * Float::from_int(4, 200) - h).abs().to_f64() < 1e-45);
    }

    #[test]
    fn enumeration_examples_on_37a1() {
        let b = basis("37a1");
        let bound = |x: f64| Float::from_f64(x, 200);
        let got = b.enumerate_bounded(&bound(0.2), 1).unwrap();
        assert_eq!(got, vec![Augmentation::from_ints(&[-1]), Augmentation::from_ints(&[0]), Augmentation::from_ints(&[1])]);
        let got = b.enumerate_bounded(&bound(0.05), 2).unwrap();
        assert_eq!(got, vec![Augmentation::new(vec![q(-1, 2)]), Augmentation::zero(1), Augmentation::new(vec![q(1, 2)])]);
        assert_eq!(b.enumerate_bounded(&Float::zero(), 5).unwrap(), vec![Augmentation::zero(1)]);
        assert!(b.enumerate_bounded(&bound(-1.0), 1).is_err());
    }

    /// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
    fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
        let n = m.len();
        let mut a = m.to_vec();
        for _ in 0..100 {
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
    }

    fn brute_force(gram: &[Vec<f64>], bound: f64, n: u32) -> Vec<Augmentation> {
        let r = gram.len();
        let lambda = min_eigenvalue(gram) / 2.0;
        let reach = ((bound / lambda).sqrt() * n as f64).ceil() as i64 + 1;
        let mut out = Vec::new();
        let mut z = vec![-reach; r];
        loop {
            let a = Augmentation { coords: z.iter().map(|&v| Rational::new(v.into(), n.into())).collect() };
            if quadratic_form(gram, &a, P50) <= bound {
                out.push(a);
            }
            let mut k = 0;
            loop {
                if k == r {
                    out.sort();
                    return out;
                }
                z[k] += 1;
                if z[k] <= reach {
                    break;
                }
                z[k] = -reach;
                k += 1;
            }
        }
    }

    #[test]
    fn enumeration_matches_box_search_on_random_grams() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let r = rng.gen_range(1..=3);
            let m: Vec<Vec<f64>> = (0..r).map(|_| (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let mut g = vec![vec![0.0; r]; r];
            for i in 0..r {
                for j in 0..r {
                    g[i][j] = (0..r).map(|k| m[i][k] * m[j][k]).sum::<f64>() + if i == j { 0.2 } else { 0.0 };
                }
            }
            let bound = rng.gen_range(0.0..3.0);
            let n = rng.gen_range(1..=3);
            assert_eq!(enumerate_gram(&g, &bound, n, P50).unwrap(), brute_force(&g, bound, n));
        }
    }

    #[test]
    fn enumeration_rejects_indefinite_forms() {
        let g = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(enumerate_gram(&g, &1.0, 1, P50).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn decompose_round_trip(c in proptest::collection::vec(-5i64..=5, 3)) {
            let b = basis("5077a1");
            let p = b.combine(&c).unwrap();
            prop_assert_eq!(b.decompose(&p).unwrap(), Augmentation::from_ints(&c));
        }

        #[test]
        fn qf_height_agrees_with_canonical_height(c in proptest::collection::vec(-3i64..=3, 2)) {
            let b = basis("389a1");
            let e = &b.blocks()[0].curve;
            let p = b.combine(&c).unwrap();
            let a = b.decompose(&p).unwrap();
            let h = canonical_height::<Float>(e, &p, P50).unwrap();
            prop_assert!((b.qf_height(&a) - h).abs().to_f64() < 1e-45);
        }
    }
}
