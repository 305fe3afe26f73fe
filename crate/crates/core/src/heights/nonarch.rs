//! Non-archimedean local heights in closed form on a minimal model.
//!
//! Every value is a rational multiple of `log p`. Points reducing to a smooth
//! point get `max(0, -v(x)) log p`; points reducing to the singular point get
//! a correction read off the valuations of the partial derivatives, the
//! discriminant and the duplication polynomial.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::arith::valuation_unchecked;
use crate::elliptic::{int, WeierstrassCurve};
use crate::Rational;

fn v(q: &Rational, p: &BigUint) -> i64 {
    if q.is_zero() {
        i64::MAX / 4
    } else {
        valuation_unchecked(q, p)
    }
}

/// Coefficient `r` with `lambda_p(P) = r log p`, for `(x, y)` on the model `e`
/// which must be minimal at `p`.
pub(crate) fn nonarch_coefficient(e: &WeierstrassCurve, x: &Rational, y: &Rational, p: &BigUint) -> Rational {
    let [a1, a2, _, a4, _] = e.coeffs();
    let a3 = e.a3();
    let partial_x = int(3) * x * x + int(2) * a2 * x + a4 - a1 * y;
    let partial_y = int(2) * y + a1 * x + a3;
    let va = v(&partial_x, p);
    let vb = v(&partial_y, p);
    if va <= 0 || vb <= 0 {
        return Rational::from_integer((-v(x, p)).max(0).into());
    }
    let n = v(e.discriminant(), p);
    if v(e.c4(), p) == 0 {
        // Multiplicative reduction: the component index is min(B, N/2).
        let m = Rational::from_integer(vb.into()).min(Rational::new(n.into(), 2.into()));
        let n = Rational::from_integer(n.into());
        return -(&m * (&n - &m) / n);
    }
    let psi3 = int(3) * x * x * x * x + e.b2() * x * x * x + int(3) * e.b4() * x * x + int(3) * e.b6() * x + e.b8();
    let vc = v(&psi3, p);
    if vc >= 3 * vb {
        Rational::new((-2 * vb).into(), 3.into())
    } else {
        Rational::new((-vc).into(), 4.into())
    }
}
