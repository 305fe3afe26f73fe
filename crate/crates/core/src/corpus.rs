//! Fixed curves and points shared by tests, the acceptance suite and the CLI
//! demos. Generators are saturated bases at primes below 100.

use crate::elliptic::{int, ECPoint, WeierstrassCurve};
use crate::Rational;

#[derive(Clone, Debug)]
pub struct CorpusCurve {
    pub label: &'static str,
    pub curve: WeierstrassCurve,
    pub generators: Vec<ECPoint>,
}

fn pt(x: i64, y: i64) -> ECPoint {
    ECPoint::affine(int(x), int(y))
}

fn ptq(xn: i64, xd: i64, yn: i64, yd: i64) -> ECPoint {
    ECPoint::affine(Rational::new(xn.into(), xd.into()), Rational::new(yn.into(), yd.into()))
}

fn entry(label: &'static str, a: [i64; 5], generators: Vec<ECPoint>) -> CorpusCurve {
    let curve = WeierstrassCurve::from_ints(a[0], a[1], a[2], a[3], a[4]).expect("corpus curve is nonsingular");
    debug_assert!(generators.iter().all(|p| curve.contains(p)));
    CorpusCurve { label, curve, generators }
}

/// Curves of rank 1 to 3 covering good, multiplicative and additive places.
pub fn curves() -> Vec<CorpusCurve> {
    vec![
        entry("37a1", [0, 0, 1, -1, 0], vec![pt(0, 0)]),
        entry("389a1", [0, 1, 1, -2, 0], vec![pt(-1, 1), pt(0, 0)]),
        entry("5077a1", [0, 0, 1, -7, 6], vec![pt(1, -1), pt(2, 0), pt(0, -3)]),
        entry("y2=x3-2", [0, 0, 0, 0, -2], vec![pt(3, 5)]),
        entry("y2=x3+17", [0, 0, 0, 0, 17], vec![pt(-2, 3), pt(4, 9)]),
        entry("8537830", [1, -1, 1, -198, -1143], vec![pt(17, 5), ptq(75, 4, 229, 8)]),
    ]
}

pub fn curve(label: &str) -> CorpusCurve {
    curves().into_iter().find(|c| c.label == label).expect("known corpus label")
}

/// The twenty-point corpus: `(curve index, point)` pairs.
pub fn height_points() -> Vec<(usize, ECPoint)> {
    let cs = curves();
    let combos: [(usize, &[i64]); 20] = [
        (0, &[1]),
        (0, &[2]),
        (0, &[-3]),
        (0, &[5]),
        (1, &[1, 0]),
        (1, &[0, 1]),
        (1, &[1, 1]),
        (1, &[2, -1]),
        (2, &[1, 0, 0]),
        (2, &[0, 1, 0]),
        (2, &[0, 0, 1]),
        (2, &[1, 1, 1]),
        (3, &[1]),
        (3, &[2]),
        (3, &[3]),
        (4, &[1, 0]),
        (4, &[0, 1]),
        (4, &[1, -1]),
        (5, &[1, 0]),
        (5, &[0, 1]),
    ];
    combos
        .iter()
        .map(|(i, c)| {
            let e = &cs[*i];
            (*i, e.curve.combine(c, &e.generators).expect("generators lie on the curve"))
        })
        .collect()
}
