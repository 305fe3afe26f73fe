//! The doubling limit `lim 4^-n h_x(2^n P)` evaluated place by place.
//!
//! Writing `x(2Q) = F(X, Z) / G(X, Z)` for `x(Q) = X / Z`, the defect
//! `h_x(2Q) - 4 h_x(Q)` is the sum over places of
//! `Phi_v(Q) = log max(|F|_v, |G|_v)` with `(X, Z)` normalized at `v`. The
//! series `h_x(P) + sum_n 4^-(n+1) sum_v Phi_v(2^n P)` is the limit itself;
//! `Phi_v` vanishes unless `v` is infinite or divides `2 disc`, and is
//! bounded by an explicit constant, which gives a certified geometric tail.
//! The finite parts run on integers modulo `p^k` so nothing grows.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{int_valuation, ln_integer, prime_divisors, DEFAULT_FACTOR_BOUND};
use crate::elliptic::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};
use crate::Rational;

/// Largest modulus, in bits, the finite-place iteration may use.
pub const MAX_MODULUS_BITS: u64 = 1 << 18;

fn abs_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::INFINITY).abs()
}

/// Upper bound for `|Phi_inf|` over the whole real curve.
pub(crate) fn arch_defect_bound(e: &WeierstrassCurve) -> f64 {
    let (b2, b4, b6, b8) = (abs_f64(e.b2()), abs_f64(e.b4()), abs_f64(e.b6()), abs_f64(e.b8()));
    let upper = (1.0 + b4 + 2.0 * b6 + b8).max(4.0 + b2 + 2.0 * b4 + b6);
    // f F - g G = disc Z^7 and f' F - g' G = disc X^7 with the cofactors
    // below; on max(|X|, |Z|) = 1 this bounds max(|F|, |G|) from below.
    let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let (r2, r4, r6) = (e.b2().clone(), e.b4().clone(), e.b6().clone());
    let z_side = 48.0 + 8.0 * b2 + abs_f64(&(&r2 * &r2 - q(32, 1) * &r4)) + 12.0 + b2 + 10.0 * b4
        + abs_f64(&(q(27, 1) * &r6 - &r2 * &r4));
    let x_cofactors = [
        -&r2 * &r2 * &r2 * &r6 / q(4, 1) + &r2 * &r2 * &r4 * &r4 / q(4, 1) + q(9, 1) * &r2 * &r4 * &r6
            - q(8, 1) * &r4 * &r4 * &r4
            - q(27, 1) * &r6 * &r6,
        &r2 * &r2 * &r4 * &r6 - &r2 * &r4 * &r4 * &r4 - q(5, 1) * &r2 * &r6 * &r6 + &r4 * &r4 * &r6,
        -&r2 * &r2 * &r6 * &r6 / q(4, 1) + q(13, 4) * &r2 * &r4 * &r4 * &r6 - q(3, 1) * &r4 * &r4 * &r4 * &r4
            - q(11, 1) * &r4 * &r6 * &r6,
        q(3, 2) * &r2 * &r4 * &r6 * &r6 - q(3, 2) * &r4 * &r4 * &r4 * &r6 - q(6, 1) * &r6 * &r6 * &r6,
        &r2 * &r2 * &r4 * &r6 / q(4, 1) - &r2 * &r4 * &r4 * &r4 / q(4, 1) - q(5, 4) * &r2 * &r6 * &r6
            + &r4 * &r4 * &r6 / q(4, 1),
        &r2 * &r2 * &r6 * &r6 / q(4, 1) - q(3, 2) * &r2 * &r4 * &r4 * &r6 + q(5, 4) * &r4 * &r4 * &r4 * &r4
            + q(4, 1) * &r4 * &r6 * &r6,
        &r2 * &r2 * &r2 * &r6 * &r6 / q(16, 1) - &r2 * &r2 * &r4 * &r4 * &r6 / q(8, 1)
            + &r2 * &r4 * &r4 * &r4 * &r4 / q(16, 1)
            - q(13, 4) * &r2 * &r4 * &r6 * &r6
            + q(13, 4) * &r4 * &r4 * &r4 * &r6
            + q(12, 1) * &r6 * &r6 * &r6,
        -q(3, 8) * &r2 * &r2 * &r4 * &r6 * &r6 + q(3, 4) * &r2 * &r4 * &r4 * &r4 * &r6 + q(3, 2) * &r2 * &r6 * &r6 * &r6
            - q(3, 8) * &r4 * &r4 * &r4 * &r4 * &r4
            - q(3, 2) * &r4 * &r4 * &r6 * &r6,
    ];
    let x_side: f64 = x_cofactors.iter().map(abs_f64).sum();
    let disc = abs_f64(e.discriminant());
    let lower = disc / z_side.max(x_side);
    let bound = upper.ln().max(-lower.ln()).max(0.0);
    bound * (1.0 + 1e-9) + 1e-9
}

fn f_g(b: &[BigInt; 4], x: &BigInt, z: &BigInt) -> (BigInt, BigInt) {
    let [b2, b4, b6, b8] = b;
    let x2 = x * x;
    let z2 = z * z;
    let xz = x * z;
    let f = &x2 * &x2 - b4 * &x2 * &z2 - BigInt::from(2) * b6 * &xz * &z2 - b8 * &z2 * &z2;
    let g = BigInt::from(4) * &x2 * &xz + b2 * &x2 * &z2 + BigInt::from(2) * b4 * &xz * &z2 + b6 * &z2 * &z2;
    (f, g)
}

struct Plan {
    steps: usize,
    primes: Vec<(BigUint, i64)>,
}

fn plan(e: &WeierstrassCurve, digits: u32) -> Result<Plan> {
    let disc = e.discriminant().numer();
    let k_total = arch_defect_bound(e) + (16.0 * abs_f64(e.discriminant())).ln();
    let target = (digits as f64 + 1.0) * std::f64::consts::LN_10;
    let want = (((k_total / 3.0).ln() + target) / 4f64.ln()).ceil().max(1.0) as usize;
    let mut primes = Vec::new();
    let mut steps = want;
    for p in prime_divisors(&(disc * BigInt::from(2)), DEFAULT_FACTOR_BOUND)? {
        let loss = int_valuation(&(disc * BigInt::from(16)), &p);
        let bits_per_digit = (p.bits() as f64).max(1.0);
        let fit = (MAX_MODULUS_BITS as f64 / bits_per_digit) as i64 / loss.max(1) - 2;
        if (fit as usize) < steps {
            steps = fit.max(0) as usize;
        }
        primes.push((p, loss));
    }
    if steps < want {
        let certified = ((steps as f64 * 4f64.ln() - (k_total / 3.0).ln()) / std::f64::consts::LN_10).floor();
        return Err(Error::Resource {
            what: format!("doubling limit needs {want} steps, modulus budget allows {steps}"),
            partial_digits: certified.max(0.0) as u32,
        });
    }
    Ok(Plan { steps, primes })
}

/// `h_hat(P)` for the affine point with abscissa `x` on the integral model `e`.
pub(crate) fn doubling_limit<S: Real>(e: &WeierstrassCurve, x: &Rational, prec: Precision, digits: u32) -> Result<S> {
    let plan = plan(e, digits)?;
    let b: [BigInt; 4] = [e.b2(), e.b4(), e.b6(), e.b8()].map(|q| q.numer().clone());
    let (num, den) = (x.numer().clone(), x.denom().clone());

    let naive = ln_integer::<S>(&num.magnitude().max(den.magnitude()).clone(), prec);

    // Archimedean part.
    let bs: Vec<S> = [e.b2(), e.b4(), e.b6(), e.b8()].iter().map(|q| S::from_rational_in(q, prec)).collect();
    let k = |n: i64| S::from_i64_in(n, prec);
    let mut xr = S::from_rational_in(&Rational::from_integer(num.clone()), prec);
    let mut zr = S::from_rational_in(&Rational::from_integer(den.clone()), prec);
    let m = xr.abs().max_of(zr.abs());
    xr = xr / m.clone();
    zr = zr / m;
    let quarter = S::one() / k(4);
    let mut weight = quarter.clone();
    let mut arch = S::zero();
    for _ in 0..plan.steps {
        let x2 = xr.clone() * xr.clone();
        let z2 = zr.clone() * zr.clone();
        let xz = xr.clone() * zr.clone();
        let f = x2.clone() * x2.clone() - bs[1].clone() * x2.clone() * z2.clone() - k(2) * bs[2].clone() * xz.clone() * z2.clone()
            - bs[3].clone() * z2.clone() * z2.clone();
        let g = k(4) * x2.clone() * xz.clone() + bs[0].clone() * x2 * z2.clone() + k(2) * bs[1].clone() * xz * z2.clone()
            + bs[2].clone() * z2.clone() * z2;
        let m = f.abs().max_of(g.abs());
        arch = arch + weight.clone() * m.ln();
        xr = f / m.clone();
        zr = g / m;
        weight = weight * quarter.clone();
    }

    // Finite parts, exact up to the truncation.
    let mut total = naive + arch;
    for (p, loss) in &plan.primes {
        let pi = BigInt::from(p.clone());
        let mut k_digits = (plan.steps as i64 + 1) * loss + 2;
        let mut modulus = pi.pow(k_digits as u32);
        let (mut xp, mut zp) = (num.clone(), den.clone());
        let mut coeff = Rational::zero();
        let mut w = Rational::new(1.into(), 4.into());
        for _ in 0..plan.steps {
            let (f, g) = f_g(&b, &xp, &zp);
            let (f, g) = (f.mod_floor(&modulus), g.mod_floor(&modulus));
            let m = int_valuation(&f, p).min(int_valuation(&g, p)).min(k_digits);
            if m >= k_digits || m > *loss {
                return Err(Error::Resource {
                    what: format!("precision exhausted at p = {p}"),
                    partial_digits: 0,
                });
            }
            coeff -= &w * Rational::from_integer(m.into());
            let pm = pi.pow(m as u32);
            xp = f / &pm;
            zp = g / &pm;
            k_digits -= m;
            modulus = &modulus / &pm;
            w /= Rational::from_integer(4.into());
        }
        if !coeff.is_zero() {
            total = total + S::from_rational_in(&coeff, prec) * ln_integer::<S>(p, prec);
        }
    }
    Ok(total)
}
