//! Archimedean local height by the duplication series.
//!
//! Each step replaces `t = 1/x` by `t(2P)` written as `w/z`; the logarithms of
//! the denominators, weighted by `4^-n`, telescope to the local height. When
//! `|x|` is small the shifted coordinate `x + 1` is used instead, which keeps
//! every `|t|` bounded and makes the tail geometric.

use crate::elliptic::WeierstrassCurve;
use crate::scalar::{Precision, Real};
use crate::Rational;

/// Number of series terms giving `digits` correct decimal places.
pub(crate) fn series_terms(e: &WeierstrassCurve, digits: u32) -> usize {
    let h = [e.b2().clone(), e.b4() * Rational::from_integer(2.into()), e.b6() * Rational::from_integer(2.into()), e.b8().clone()]
        .iter()
        .map(|b| num_traits::ToPrimitive::to_f64(b).unwrap_or(f64::MAX).abs())
        .fold(4.0f64, f64::max);
    let d = digits as f64;
    (5.0 / 3.0 * d + 0.5 + 0.75 * (7.0 + 4.0 / 3.0 * h.ln()).ln()).ceil() as usize
}

/// `lambda_inf(x)` on the model `e`, normalized so that
/// `lambda_inf(P) - log|x(P)|` tends to zero at the origin.
pub(crate) fn arch_local<S: Real>(e: &WeierstrassCurve, x: &Rational, prec: Precision, digits: u32) -> S {
    let c = |q: &Rational| S::from_rational_in(q, prec);
    let k = |n: i64| S::from_i64_in(n, prec);
    let (b2, b4, b6, b8) = (c(e.b2()), c(e.b4()), c(e.b6()), c(e.b8()));
    let b2p = b2.clone() - k(12);
    let b4p = b4.clone() - b2.clone() + k(6);
    let b6p = b6.clone() - k(2) * b4.clone() + b2.clone() - k(4);
    let b8p = b8.clone() - k(3) * b6.clone() + k(3) * b4.clone() - b2.clone() + k(3);

    let xs = c(x);
    let half = S::from_rational_in(&Rational::new(1.into(), 2.into()), prec);
    let (mut t, mut beta) = if xs.abs() < half { (S::one() / (xs + S::one()), false) } else { (S::one() / xs, true) };
    let lam = -t.abs().ln();
    let mut mu = S::zero();
    let mut f = S::one();
    let quarter = S::one() / k(4);
    for _ in 0..series_terms(e, digits) {
        let (c2, c4, c6, c8) = if beta { (&b2, &b4, &b6, &b8) } else { (&b2p, &b4p, &b6p, &b8p) };
        let t2 = t.clone() * t.clone();
        let t3 = t2.clone() * t.clone();
        let t4 = t2.clone() * t2.clone();
        let w = k(4) * t.clone() + c2.clone() * t2.clone() + k(2) * c4.clone() * t3.clone() + c6.clone() * t4.clone();
        let z = S::one() - c4.clone() * t2 - k(2) * c6.clone() * t3 - c8.clone() * t4;
        let zw = if beta { z.clone() + w.clone() } else { z.clone() - w.clone() };
        if w.abs() <= k(2) * z.abs() {
            mu = mu + f.clone() * z.abs().ln();
            t = w / z;
        } else {
            mu = mu + f.clone() * zw.abs().ln();
            t = w / zw;
            beta = !beta;
        }
        f = f * quarter.clone();
    }
    lam + mu * quarter
}
