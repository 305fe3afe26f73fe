use super::*;
use crate::corpus;
use crate::heights::canonical_height;

#[test]
fn criterion() {
    assert!(md_criterion(2, 1));
    assert!(!md_criterion(1, 1));
    assert!(md_criterion(3, 0));
}

#[test]
fn pairing_matrices() {
    let prec = Precision(40);
    let e = WeierstrassCurve::from_ints(0, 0, 0, -1, 0).unwrap();
    let tors: Vec<ECPoint> = [(0, 0), (1, 0)].iter().map(|&(x, y)| ECPoint::affine(Rational::from_integer(x.into()), Rational::from_integer(y.into()))).collect();
    let m = height_pairing_matrix::<f64>(&e, &tors, prec).unwrap();
    assert!(m.iter().flatten().all(|v| *v == 0.0));

    let c = corpus::curve("37a1");
    let p = c.generators[0].clone();
    let h: f64 = canonical_height(&c.curve, &p, prec).unwrap();
    let one = height_pairing_matrix::<f64>(&c.curve, std::slice::from_ref(&p), prec).unwrap();
    assert!((one[0][0] - 2.0 * h).abs() < 1e-14);
    let two = c.curve.double(&p).unwrap();
    let m = height_pairing_matrix::<f64>(&c.curve, &[p, two], prec).unwrap();
    for (i, row) in [[1.0, 2.0], [2.0, 4.0]].iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((m[i][j] - 2.0 * h * v).abs() < 1e-13);
        }
    }
    assert!(determinant(&m).abs() < 1e-13);
}

#[test]
fn degree_pairing_algebra() {
    let p = DegreePairing::from_degrees(&[2, 2], &[vec![0, 4], vec![0, 0]]).unwrap();
    assert_eq!(p.matrix(), &[vec![8, 0], vec![0, 8]]);
    assert_eq!(p.deg_l(), 8);
    assert_eq!(p.determinant(), Rational::from_integer(64.into()));
    assert_eq!(p.leading(), Rational::from_integer(1.into()));
    assert!(p.is_positive_definite());
    assert!(DegreePairing::new(vec![vec![1, 2], vec![3, 1]], 2).is_err());
    assert!(!DegreePairing::new(vec![vec![1, 2], vec![2, 1]], 2).unwrap().is_positive_definite());
}

#[test]
fn degree_pairing_from_fibers() {
    let s = demos::rank_one(2).unwrap();
    let est = DegreePairing::estimate(&s.curve, &s.maps, &[101, 103, 107, 109, 113]).unwrap();
    assert_eq!(est, s.pairing);
}

#[test]
fn bound_examples() {
    let prec = Precision(40);
    let unit = DegreePairing::new(vec![vec![4]], 4).unwrap();
    let zero: f64 = md_bound(&unit, &0.0, &0.0, prec).unwrap();
    assert_eq!(zero, 0.0);
    // h - (1 + sqrt h) = 0 at sqrt h = golden ratio.
    let b: f64 = md_bound(&unit, &0.0, &1.0, prec).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((b - phi * phi).abs() < 1e-12, "{b}");
    let big = DegreePairing::new(vec![vec![16]], 4).unwrap();
    let b4: f64 = md_bound(&big, &0.0, &1.0, prec).unwrap();
    assert!(b4 < b);
    let bf: crate::Float = md_bound(&unit, &crate::Float::from_f64_in(0.0, prec), &crate::Float::from_f64_in(1.0, prec), prec).unwrap();
    let golden = ((crate::Float::from_int(1, 200) + crate::Float::from_int(5, 200).sqrt()) / crate::Float::from_int(2, 200)).clone();
    let diff = (bf - golden.clone() * golden).abs().to_f64();
    assert!(diff < 1e-35, "{diff}");
    let singular = DegreePairing::new(vec![vec![0]], 4).unwrap();
    assert!(matches!(md_bound(&singular, &0.0, &1.0, prec), Err(Error::Input(_))));
}

#[test]
fn rank_zero_report() {
    let prec = Precision(30);
    let s = demos::rank_zero().unwrap();
    let r = md_report::<f64>(&s, &MdConfig::default(), prec).unwrap();
    assert!(r.criterion_ok);
    assert_eq!(r.candidates, vec![Augmentation::zero(0)]);
    assert!(r.sound, "{:?}", r.errors);
    assert_eq!(r.rational_images.len(), 2);
    let check = r.det_check.unwrap();
    for smp in check.samples.iter().filter(|s| s.ratio.is_some()) {
        assert!((smp.ratio.unwrap() - 1.0).abs() < 1e-12, "{}", smp.id);
    }
    assert!(check.passed);
}

#[test]
fn rank_one_report() {
    let prec = Precision(30);
    let s = demos::rank_one(8).unwrap();
    let r = md_report::<f64>(&s, &MdConfig::default(), prec).unwrap();
    assert!(r.criterion_ok && r.errors.is_empty(), "{:?}", r.errors);
    let Bound::Finite(b) = r.bound else { panic!("no bound") };
    let check = r.det_check.as_ref().unwrap();
    assert!(check.passed);
    // Rational points: images dependent, determinant exactly zero.
    assert!(check.samples.iter().filter(|s| !s.id.starts_with("lift")).all(|s| s.exact_zero && s.det == 0.0));
    // Brute force over multiples of the generator.
    let h: f64 = canonical_height(&s.maps[0].target, &s.generators[0], prec).unwrap();
    let expect: Vec<Augmentation> =
        (-100i64..=100).filter(|k| (k * k) as f64 * h <= b).map(|k| Augmentation::from_ints(&[k])).collect();
    let mut got = r.candidates.clone();
    got.sort();
    let mut expect = expect;
    expect.sort();
    assert_eq!(got, expect);
    assert!(r.sound);
    // (2, 15) maps to +-(P + T) and +-(3P + T).
    let img = r.rational_images.iter().find(|c| c.id == "(2,15)").unwrap();
    let abs: Vec<_> = img.coords.iter().map(|a| a.coords[0].abs()).collect();
    assert_eq!(abs, vec![Rational::from_integer(1.into()), Rational::from_integer(3.into())]);
}

#[test]
fn criterion_failure_is_data() {
    let s = demos::rank_one_single_map().unwrap();
    let r = md_report::<f64>(&s, &MdConfig::default(), Precision(20)).unwrap();
    assert!(!r.criterion_ok);
    assert!(matches!(r.bound, Bound::NotDerivable(_)));
    assert!(r.candidates.is_empty());
}

#[test]
fn insufficient_range() {
    let s = demos::rank_one(2).unwrap();
    let one = vec![s.corpus[0].clone()];
    let e = det_asymptotic_check::<f64>(&s.pairing, &s.maps, None, &one, &MdConfig::default(), Precision(20));
    assert!(matches!(e, Err(Error::InsufficientHeightRange(_))));
}
