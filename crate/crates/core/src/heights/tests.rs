use super::*;
use crate::corpus;
use crate::elliptic::Isomorphism;
use crate::Float;
use proptest::prelude::*;

const P50: Precision = Precision(50);

fn curve(a: [i64; 5]) -> WeierstrassCurve {
    WeierstrassCurve::from_ints(a[0], a[1], a[2], a[3], a[4]).unwrap()
}

fn pt(x: i64, y: i64) -> ECPoint {
    ECPoint::affine(Rational::from_integer(x.into()), Rational::from_integer(y.into()))
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn dec(s: &str) -> Float {
    Float::from_rational(&crate::arith::parse_decimal(s).unwrap(), P50.working_bits())
}

fn close(a: &Float, b: &Float, tol: f64) -> bool {
    (a - b).abs().to_f64() <= tol
}

fn ln_big(n: &num_bigint::BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 60 {
        return (num_traits::ToPrimitive::to_f64(n).unwrap()).ln();
    }
    let shift = bits - 60;
    let top: num_bigint::BigUint = n >> shift;
    num_traits::ToPrimitive::to_f64(&top).unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `4^-n h_x(2^n P)` with exact rational doubling.
fn naive_limit(e: &WeierstrassCurve, p: &ECPoint, n: u32) -> f64 {
    let mut r = p.clone();
    for _ in 0..n {
        r = e.double(&r).unwrap();
    }
    let x = r.x().unwrap();
    let top = x.numer().magnitude().max(x.denom().magnitude()).clone();
    ln_big(&top) / 4f64.powi(n as i32)
}

#[test]
fn naive_height_examples() {
    let e = curve([0, 0, 1, -1, 0]);
    assert_eq!(naive_x_height::<f64>(&e, &pt(0, 0), P50).unwrap(), 0.0);
    let h = naive_x_height::<f64>(&e, &ECPoint::affine(q(1, 4), q(-5, 8)), P50).unwrap();
    assert!((h - 4f64.ln()).abs() < 1e-15);
    let h = naive_x_height::<f64>(&e, &ECPoint::affine(q(21, 25), q(0, 1)), P50).unwrap();
    assert!((h - 25f64.ln()).abs() < 1e-15);
    assert!(matches!(naive_x_height::<f64>(&e, &ECPoint::Infinity, P50), Err(Error::Domain(_))));
}

#[test]
fn doubling_limit_matches_naive_iteration() {
    // The truncated naive limit is off by at most K 4^-n / 3.
    for (a, p) in [([0, 0, 1, -1, 0], pt(0, 0)), ([0, 1, 1, -2, 0], pt(-1, 1)), ([0, 0, 0, 0, -2], pt(3, 5))] {
        let e = curve(a);
        let m = e.minimal_model().unwrap();
        let k = doubling::arch_defect_bound(&m.curve) + (16.0 * num_traits::ToPrimitive::to_f64(m.curve.discriminant()).unwrap().abs()).ln();
        let n = 8;
        let oracle = naive_limit(&e, &p, n);
        let h = canonical_height_doubling::<Float>(&e, &p, P50).unwrap().value.to_f64();
        assert!((h - oracle).abs() <= k / 3.0 * 4f64.powi(-(n as i32)) + 1e-12, "{e}: {h} vs {oracle}");
    }
    let e = curve([0, 0, 1, -1, 0]);
    let h = canonical_height_doubling::<Float>(&e, &pt(0, 0), P50).unwrap().value;
    assert_eq!(h.to_fixed(7), "0.0511114");
}

#[test]
fn reference_values_from_an_independent_implementation() {
    // Computed with PARI/GP ellheight at 256 bits.
    let cases = [
        ([0, 0, 1, -1, 0], pt(0, 0), "0.05111140823996884023588609975694202160954"),
        ([0, 1, 1, -2, 0], pt(-1, 1), "0.6866670833055865857235521029540967890619"),
        ([0, 0, 1, -7, 6], pt(-3, 0), "1.501924536613018169605365947749557953547"),
        ([0, 0, 0, 0, -2], pt(3, 5), "1.349576835680118045477761185644601869060"),
        ([0, 0, 0, 0, 17], pt(-2, 3), "0.4546168651842106268557978454585668171914"),
        ([1, -1, 1, -198, -1143], pt(17, 5), "1.902104441599455244864664318925626485017"),
        ([0, 0, 0, -16, 16], pt(0, 4), "0.05111140823996884023588609975694202160954"),
    ];
    for (a, p, want) in cases {
        let e = curve(a);
        let want = dec(want);
        let d = canonical_height_doubling::<Float>(&e, &p, P50).unwrap().value;
        let l = canonical_height_localsum::<Float>(&e, &p, P50).unwrap().value;
        assert!(close(&d, &want, 1e-38), "{e} doubling {d}");
        assert!(close(&l, &want, 1e-38), "{e} local sum {l}");
    }
}

#[test]
fn methods_agree_on_corpus() {
    let cs = corpus::curves();
    for (i, p) in corpus::height_points() {
        let e = &cs[i].curve;
        let d = canonical_height_doubling::<Float>(e, &p, P50).unwrap();
        let l = canonical_height_localsum::<Float>(e, &p, P50).unwrap();
        assert_eq!(d.method, HeightMethod::DoublingLimit);
        assert_eq!(l.method, HeightMethod::LocalSum);
        assert!(close(&d.value, &l.value, 1e-47), "{} {p}: {} vs {}", cs[i].label, d.value, l.value);
        assert!(d.value > Float::zero());
    }
}

#[test]
fn torsion_heights_vanish() {
    let e = curve([0, 0, 0, 0, 1]);
    for p in e.torsion_subgroup().unwrap().points.iter().filter(|p| !p.is_infinity()) {
        assert!(canonical_height_doubling::<Float>(&e, p, P50).unwrap().value.is_zero());
        assert!(canonical_height_localsum::<Float>(&e, p, P50).unwrap().value.is_zero());
        // The local heights themselves are nonzero but cancel.
        let raw = local_height_sum::<Float>(&e, p, P50).unwrap();
        assert!(raw.abs().to_f64() < 1e-45, "{p}: {raw}");
    }
    let e = curve([0, 0, 0, -1, 0]);
    for p in [pt(0, 0), pt(1, 0), pt(-1, 0)] {
        assert!(local_height_sum::<Float>(&e, &p, P50).unwrap().abs().to_f64() < 1e-45);
    }
}

#[test]
fn local_decomposition_of_37a1() {
    let e = curve([0, 0, 1, -1, 0]);
    let p = pt(0, 0);
    let h = canonical_height_doubling::<Float>(&e, &p, P50).unwrap().value;
    let arch = local_height_arch::<Float>(&e, &p, P50).unwrap();
    let l37 = local_height_nonarch::<Float>(&e, &p, &BigUint::from(37u32), P50).unwrap();
    assert!(close(&arch.value, &(&h - &l37.value), 1e-45));
    // (0, 0) reduces to a smooth point mod 37.
    assert_eq!(l37.exact_part, Some(Rational::zero()));
    let table = local_heights::<Float>(&e, &p, P50).unwrap();
    assert_eq!(table.len(), 1);
    assert_eq!(table[0].place, Place::Archimedean);
}

#[test]
fn good_primes_follow_the_model_metric() {
    let e = curve([0, 0, 1, -1, 0]);
    let p5 = ECPoint::affine(q(1, 4), q(-5, 8));
    let two = BigUint::from(2u32);
    let l2 = local_height_nonarch::<Float>(&e, &p5, &two, P50).unwrap();
    assert_eq!(l2.exact_part, Some(Rational::from_integer(2.into())));
    assert!(close(&l2.value, &(Float::from_int(4, 200).ln()), 1e-45));
    let l5 = local_height_nonarch::<Float>(&e, &p5, &BigUint::from(5u32), P50).unwrap();
    assert_eq!(l5.exact_part, Some(Rational::zero()));
    assert!(l5.value.is_zero());
}

#[test]
fn local_heights_sum_to_global_with_denominators() {
    let cs = corpus::curves();
    for (i, p) in corpus::height_points().into_iter().take(12) {
        let e = &cs[i].curve;
        let table = local_heights::<Float>(e, &p, P50).unwrap();
        let total = table.iter().fold(Float::zero(), |acc, l| acc + &l.value);
        let h = canonical_height_doubling::<Float>(e, &p, P50).unwrap().value;
        assert!(close(&total, &h, 1e-47));
        for l in &table[1..] {
            let Place::Finite(pr) = &l.place else { panic!("finite places follow the archimedean one") };
            let want = Float::from_rational(l.exact_part.as_ref().unwrap(), P50.working_bits())
                * Float::from_int(num_bigint::BigInt::from(pr.clone()), P50.working_bits()).ln();
            assert!(close(&l.value, &want, 1e-50));
        }
    }
}

#[test]
fn arch_height_is_symmetric() {
    let cs = corpus::curves();
    for (i, p) in corpus::height_points() {
        let e = &cs[i].curve;
        let a = local_height_arch::<Float>(e, &p, P50).unwrap().value;
        let b = local_height_arch::<Float>(e, &e.neg(&p), P50).unwrap().value;
        assert!(close(&a, &b, 1e-48));
    }
}

#[test]
fn singular_reduction_branches() {
    let e = curve([0, 0, 0, 0, 17]);
    let p = pt(-2, 3);
    let exact = |q: u32| local_height_nonarch::<Float>(&e, &p, &BigUint::from(q), P50).unwrap().exact_part.unwrap();
    // At 2 the duplication polynomial vanishes to order at least 3B with B = 1.
    assert_eq!(exact(2), q(-2, 3));
    // At 3 it vanishes to order 2 only.
    assert_eq!(exact(3), q(-1, 2));

    let e = curve([1, -1, 1, -198, -1143]);
    let p = pt(17, 5);
    for prime in [2u32, 7] {
        let l = local_height_nonarch::<Float>(&e, &p, &BigUint::from(prime), P50).unwrap();
        assert!(l.exact_part.unwrap() < Rational::zero());
    }

    for (a, p) in [([0, 0, 0, 0, 17], pt(-2, 3)), ([1, -1, 1, -198, -1143], pt(17, 5))] {
        let e = curve(a);
        for n in 1..=8 {
            let r = e.scalar_mul(n, &p).unwrap();
            let d = canonical_height_doubling::<Float>(&e, &r, P50).unwrap().value;
            let s = canonical_height_localsum::<Float>(&e, &r, P50).unwrap().value;
            assert!(close(&d, &s, 1e-47), "{e} {n}P");
        }
    }
}

#[test]
fn invariant_under_change_of_model() {
    let e = curve([0, 1, 1, -2, 0]);
    let iso = Isomorphism::new(q(5, 3), q(-2, 7), q(1, 2), q(3, 1)).unwrap();
    let f = iso.apply_curve(&e).unwrap();
    for p in [pt(-1, 1), pt(0, 0)] {
        let a = canonical_height_localsum::<Float>(&e, &p, P50).unwrap().value;
        let b = canonical_height_localsum::<Float>(&f, &iso.map_point(&p), P50).unwrap().value;
        let c = canonical_height_doubling::<Float>(&f, &iso.map_point(&p), P50).unwrap().value;
        assert!(close(&a, &b, 1e-48));
        assert!(close(&a, &c, 1e-47));
    }
}

#[test]
fn hardware_floats_agree() {
    let cs = corpus::curves();
    for (i, p) in corpus::height_points() {
        let e = &cs[i].curve;
        let big = canonical_height::<Float>(e, &p, P50).unwrap().to_f64();
        let d = canonical_height_localsum::<f64>(e, &p, P50).unwrap().value;
        let dd = canonical_height_doubling::<f64>(e, &p, P50).unwrap().value;
        assert!((big - d).abs() < 1e-11 * (1.0 + big), "{big} {d}");
        assert!((big - dd).abs() < 1e-11 * (1.0 + big), "{big} {dd}");
        let s = canonical_height_localsum::<f32>(e, &p, P50).unwrap().value as f64;
        assert!((big - s).abs() < 1e-3 * (1.0 + big));
    }
}

#[test]
fn bilinear_form_conventions() {
    let e = curve([0, 1, 1, -2, 0]);
    let (p, r) = (pt(-1, 1), pt(0, 0));
    let h = canonical_height::<Float>(&e, &p, P50).unwrap();
    let bpp = height_bilinear::<Float>(&e, &p, &p, P50).unwrap();
    assert!(close(&bpp, &(Float::from_int(2, 200) * &h), 1e-47));
    let bpm = height_bilinear::<Float>(&e, &p, &e.neg(&p), P50).unwrap();
    assert!(close(&bpm, &(Float::from_int(-2, 200) * &h), 1e-47));
    let b1 = height_bilinear::<Float>(&e, &p, &r, P50).unwrap();
    let b2 = height_bilinear::<Float>(&e, &r, &p, P50).unwrap();
    assert!(close(&b1, &b2, 1e-48));
}

#[test]
fn budget_overflow_reports_partial_precision() {
    let e = curve([0, 0, 1, -1, 0]);
    let err = canonical_height_doubling::<Float>(&e, &pt(0, 0), Precision(200_000)).unwrap_err();
    match err {
        Error::Resource { partial_digits, .. } => assert!(partial_digits > 1000 && partial_digits < 200_000),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn off_curve_and_origin_rejected() {
    let e = curve([0, 0, 1, -1, 0]);
    assert_eq!(canonical_height_localsum::<f64>(&e, &pt(1, 1), P50).unwrap_err(), Error::NotOnCurve);
    assert!(matches!(local_height_arch::<f64>(&e, &ECPoint::Infinity, P50), Err(Error::Domain(_))));
    assert!(canonical_height_doubling::<f64>(&e, &ECPoint::Infinity, P50).unwrap().value == 0.0);
}

fn corpus_pair() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>)> {
    (0usize..6).prop_flat_map(|i| {
        let r = corpus::curves()[i].generators.len();
        (Just(i), proptest::collection::vec(-2i64..=2, r), proptest::collection::vec(-2i64..=2, r))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadraticity(i in 0usize..6, n in -8i64..=8, seed in proptest::collection::vec(-1i64..=1, 3)) {
        let c = &corpus::curves()[i];
        let coeffs: Vec<i64> = seed.iter().take(c.generators.len()).copied().collect();
        prop_assume!(coeffs.iter().any(|&v| v != 0));
        let p = c.curve.combine(&coeffs, &c.generators).unwrap();
        let np = c.curve.scalar_mul(n, &p).unwrap();
        let h = canonical_height::<Float>(&c.curve, &p, P50).unwrap();
        let hn = canonical_height::<Float>(&c.curve, &np, P50).unwrap();
        let n2 = Float::from_int(n * n, 200);
        prop_assert!(close(&hn, &(n2 * &h), 1e-45));
    }

    #[test]
    fn parallelogram_law((i, a, b) in corpus_pair()) {
        let c = &corpus::curves()[i];
        let e = &c.curve;
        let p = e.combine(&a, &c.generators).unwrap();
        let r = e.combine(&b, &c.generators).unwrap();
        let h = |x: &ECPoint| canonical_height::<Float>(e, x, P50).unwrap();
        let lhs = h(&e.add(&p, &r).unwrap()) + h(&e.sub(&p, &r).unwrap());
        let rhs = Float::from_int(2, 200) * (h(&p) + h(&r));
        prop_assert!(close(&lhs, &rhs, 1e-45));
    }

    #[test]
    fn cauchy_schwarz((i, a, b) in corpus_pair()) {
        let c = &corpus::curves()[i];
        let e = &c.curve;
        let p = e.combine(&a, &c.generators).unwrap();
        let r = e.combine(&b, &c.generators).unwrap();
        let bpr = height_bilinear::<Float>(e, &p, &r, P50).unwrap().abs();
        let hp = canonical_height::<Float>(e, &p, P50).unwrap();
        let hr = canonical_height::<Float>(e, &r, P50).unwrap();
        let bound = Float::from_int(2, 200) * hp.sqrt() * hr.sqrt();
        prop_assert!(bpr.to_f64() <= bound.to_f64() + 1e-10);
    }

    #[test]
    fn bilinearity((i, a, b) in corpus_pair(), extra in proptest::collection::vec(-2i64..=2, 3)) {
        let c = &corpus::curves()[i];
        let e = &c.curve;
        let p = e.combine(&a, &c.generators).unwrap();
        let p2 = e.combine(&extra[..c.generators.len()], &c.generators).unwrap();
        let r = e.combine(&b, &c.generators).unwrap();
        let b = |x: &ECPoint, y: &ECPoint| height_bilinear::<Float>(e, x, y, P50).unwrap();
        let lhs = b(&e.add(&p, &p2).unwrap(), &r);
        let rhs = b(&p, &r) + b(&p2, &r);
        prop_assert!(close(&lhs, &rhs, 1e-44));
    }
}
