//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use heightlab::arith::parse_decimal;
use heightlab::corpus;
use heightlab::gm_torsor::{torsor_global_height, RigidifiedBundle, TorsorPoint};
use heightlab::height_machine::{degree_ratio_diagnostic, demos as diag_demos, EnvelopeConfig};
use heightlab::heights::{canonical_height, canonical_height_doubling, local_heights};
use heightlab::manin::{demos as md_demos, md_report, Bound, MdConfig, MdSystem};
use heightlab::mordell_weil::{enumerate_gram, kummer_exponent, MWBasis};
use heightlab::{ECPoint, Float, Precision, Rational, Real};

const PREC: Precision = Precision(50);
const SEED: u64 = 20240611;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn f(x: f64) -> Float {
    Float::from_f64_in(x, PREC)
}

/// `10^-k` exactly.
fn ten_to_minus(k: usize) -> Float {
    Float::from_rational_in(&parse_decimal(&format!("0.{}1", "0".repeat(k - 1))).unwrap(), PREC)
}

fn h(e: &heightlab::WeierstrassCurve, p: &ECPoint) -> Float {
    canonical_height::<Float>(e, p, PREC).unwrap()
}

fn quadraticity() -> Outcome {
    let tol = ten_to_minus(40);
    let mut by_curve: BTreeMap<usize, Vec<ECPoint>> = BTreeMap::new();
    for (i, p) in corpus::height_points() {
        by_curve.entry(i).or_default().push(p);
    }
    let curves = corpus::curves();
    let mut worst = f(0.0);
    let (mut n_curves, mut n_points) = (0, 0);
    for (i, pts) in by_curve.iter().filter(|(_, p)| p.len() >= 3) {
        let e = &curves[*i].curve;
        n_curves += 1;
        for p in pts.iter().take(3) {
            n_points += 1;
            let hp = h(e, p);
            for n in (-8i64..=8).filter(|n| *n != 0) {
                let lhs = h(e, &e.scalar_mul(n, p).unwrap());
                let err = (lhs - f((n * n) as f64) * hp.clone()).abs();
                worst = worst.max_of(err);
            }
        }
    }
    let ok = n_curves >= 5 && worst <= tol;
    outcome(ok, format!("{n_curves} curves, {n_points} points, |n| <= 8, max error {:.3e} (tolerance 1e-40)", worst.to_f64()))
}

fn local_decomposition() -> Outcome {
    let tol = ten_to_minus(40);
    let curves = corpus::curves();
    let pts = corpus::height_points();
    let mut worst = f(0.0);
    for (i, p) in &pts {
        let e = &curves[*i].curve;
        let global = canonical_height_doubling::<Float>(e, p, PREC).unwrap().value;
        let sum = local_heights::<Float>(e, p, PREC).unwrap().into_iter().fold(f(0.0), |acc, l| acc + l.value);
        worst = worst.max_of((global - sum).abs());
    }
    outcome(worst <= tol, format!("{} points, max |doubling - sum of locals| {:.3e} (tolerance 1e-40)", pts.len(), worst.to_f64()))
}

fn torsor_lifts() -> Outcome {
    let tol = ten_to_minus(40);
    let c = corpus::curve("8537830");
    let base = c.curve.add(&c.generators[0], &c.generators[1]).unwrap();
    let bundle = RigidifiedBundle::new(c.curve.clone(), 2).unwrap();
    let pt = TorsorPoint::new(base, Rational::new(7.into(), 12.into())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut heights = Vec::new();
    for _ in 0..10 {
        let num: i64 = rng.gen_range(1..=10_000) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let den: i64 = rng.gen_range(1..=10_000);
        let lifted = pt.rescale(&Rational::new(num.into(), den.into())).unwrap();
        heights.push(torsor_global_height::<Float>(&bundle, &lifted, PREC).unwrap());
    }
    let hi = heights.iter().cloned().fold(heights[0].clone(), Real::max_of);
    let lo = heights.iter().fold(heights[0].clone(), |a, b| if *b < a { b.clone() } else { a });
    let spread = hi - lo;
    outcome(spread <= tol, format!("10 rescalings on 8537830, spread {:.3e} (tolerance 1e-40)", spread.to_f64()))
}

fn parallelogram_and_cauchy_schwarz() -> Outcome {
    let tol = ten_to_minus(35);
    let slack = ten_to_minus(10);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let curves = [corpus::curve("389a1"), corpus::curve("5077a1"), corpus::curve("y2=x3+17")];
    let (mut worst_par, mut worst_cs) = (f(0.0), f(-1e300));
    for _ in 0..200 {
        let c = &curves[rng.gen_range(0..curves.len())];
        let mut coeffs = || -> Vec<i64> { (0..c.generators.len()).map(|_| rng.gen_range(-4..=4)).collect() };
        let (a, b) = (coeffs(), coeffs());
        let e = &c.curve;
        let p = e.combine(&a, &c.generators).unwrap();
        let q = e.combine(&b, &c.generators).unwrap();
        let (hp, hq) = (h(e, &p), h(e, &q));
        let hs = h(e, &e.add(&p, &q).unwrap());
        let hd = h(e, &e.sub(&p, &q).unwrap());
        let two = f(2.0);
        worst_par = worst_par.max_of((hs.clone() + hd - two.clone() * hp.clone() - two.clone() * hq.clone()).abs());
        let pairing = (hs - hp.clone() - hq.clone()) / two;
        worst_cs = worst_cs.max_of(pairing.abs() - (hp * hq).sqrt());
    }
    let ok = worst_par <= tol && worst_cs <= slack;
    outcome(
        ok,
        format!(
            "200 pairs, parallelogram defect {:.3e} (tolerance 1e-35), max |<P,Q>| - sqrt(h(P)h(Q)) = {:.3e} (slack 1e-10)",
            worst_par.to_f64(),
            worst_cs.to_f64()
        ),
    )
}

/// `G^-1` of a small symmetric positive definite matrix, by Gauss-Jordan.
fn inverse(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let r = g.len();
    let mut m: Vec<Vec<f64>> = g.iter().enumerate().map(|(i, row)| {
        let mut x = row.clone();
        x.extend((0..r).map(|j| if i == j { 1.0 } else { 0.0 }));
        x
    }).collect();
    for c in 0..r {
        let piv = (c..r).max_by(|a, b| m[*a][c].abs().total_cmp(&m[*b][c].abs())).unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        m[c].iter_mut().for_each(|x| *x /= d);
        for i in 0..r {
            if i != c {
                let k = m[i][c];
                let pivot_row = m[c].clone();
                m[i].iter_mut().zip(pivot_row).for_each(|(x, p)| *x -= k * p);
            }
        }
    }
    m.into_iter().map(|row| row[r..].to_vec()).collect()
}

/// Every `a` in `(1/n) Z^r` with `a^T G a / 2 <= bound`, by exhaustive search
/// over the box `|a_i| <= sqrt(2 bound (G^-1)_ii)`, decided exactly.
fn brute_force(g: &[Vec<i64>], bound: &Rational, n: i64) -> Vec<Vec<Rational>> {
    let r = g.len();
    let inv = inverse(&g.iter().map(|row| row.iter().map(|x| *x as f64).collect()).collect::<Vec<_>>());
    let b = bound.numer().to_string().parse::<f64>().unwrap() / bound.denom().to_string().parse::<f64>().unwrap();
    let reach: Vec<i64> = (0..r).map(|i| ((2.0 * b * inv[i][i]).sqrt() * n as f64).floor() as i64 + 1).collect();
    let mut out = Vec::new();
    let mut k = reach.iter().map(|x| -x).collect::<Vec<i64>>();
    loop {
        let mut twice = 0i64;
        for i in 0..r {
            for j in 0..r {
                twice += g[i][j] * k[i] * k[j];
            }
        }
        // a^T G a / 2 = twice / (2 n^2).
        if Rational::new(twice.into(), (2 * n * n).into()) <= *bound {
            out.push(k.iter().map(|x| Rational::new((*x).into(), n.into())).collect());
        }
        let mut i = 0;
        loop {
            if i == r {
                out.sort();
                return out;
            }
            k[i] += 1;
            if k[i] <= reach[i] {
                break;
            }
            k[i] = -reach[i];
            i += 1;
        }
    }
}

fn enumeration_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut agreed = 0;
    let mut total_points = 0;
    for _ in 0..20 {
        let r = rng.gen_range(1..=3);
        let m: Vec<Vec<i64>> = (0..r).map(|_| (0..r).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let g: Vec<Vec<i64>> = (0..r)
            .map(|i| (0..r).map(|j| (0..r).map(|k| m[k][i] * m[k][j]).sum::<i64>() + if i == j { rng.gen_range(1..=3) } else { 0 }).collect())
            .collect();
        // Tenths with a numerator prime to 5 never tie with a^T G a / 2.
        let mut tenths = rng.gen_range(1..=60);
        if tenths % 5 == 0 {
            tenths += 1;
        }
        let bound = Rational::new(tenths.into(), 10.into());
        let n = rng.gen_range(1..=4);
        let gf: Vec<Vec<Float>> = g.iter().map(|row| row.iter().map(|x| Float::from_i64_in(*x, PREC)).collect()).collect();
        let mut got: Vec<Vec<Rational>> = enumerate_gram(&gf, &Float::from_rational_in(&bound, PREC), n as u32, PREC)
            .unwrap()
            .into_iter()
            .map(|a| a.coords)
            .collect();
        got.sort();
        let want = brute_force(&g, &bound, n);
        total_points += want.len();
        if got == want {
            agreed += 1;
        }
    }
    let c = corpus::curve("37a1");
    let basis = MWBasis::<Float>::new(c.curve, c.generators, PREC).unwrap();
    let example = basis.enumerate_bounded(&Float::from_rational_in(&parse_decimal("0.2").unwrap(), PREC), 1).unwrap();
    let ok = agreed == 20 && example.len() == 3;
    outcome(ok, format!("{agreed}/20 random Gram instances agree ({total_points} lattice points), 37a1 at B = 0.2 gives {} candidates", example.len()))
}

fn kummer() -> Outcome {
    let cases = [(2u32, 1u32, "64"), (2, 4, "256"), (6, 1, "5184")];
    let got: Vec<String> = cases.iter().map(|(c, t, _)| kummer_exponent(&(*c).into(), *t, 1_000_000).unwrap().value.to_string()).collect();
    let ok = cases.iter().zip(&got).all(|((_, _, want), g)| g == want);
    outcome(ok, format!("(2,1) -> {}, (2,4) -> {}, (6,1) -> {}", got[0], got[1], got[2]))
}

fn degree_ratio() -> Outcome {
    let cfg = EnvelopeConfig::default();
    let t = diag_demos::tensor_power(12).unwrap();
    let r = degree_ratio_diagnostic::<Float>(&t.q0, &t.q, t.deg_l0, t.deg_l, &t.corpus, &cfg, PREC).unwrap();
    let zero = f(0.0);
    let exact = r.samples.iter().all(|s| s.values[2] == zero);

    let p = diag_demos::pairing_class(12).unwrap();
    let r = degree_ratio_diagnostic::<Float>(&p.q0, &p.q, p.deg_l0, p.deg_l, &p.corpus, &cfg, PREC).unwrap();
    let fit = r.fit.as_ref().unwrap();
    let top: Vec<Float> = r.samples[r.samples.len() / 2..].iter().map(|s| s.values[3].clone()).collect();
    let monotone = top.windows(2).all(|w| w[1] <= w[0]);
    let stable = fit.top <= fit.bottom && monotone;
    outcome(
        exact && stable,
        format!(
            "tensor power residuals exactly zero: {exact}; pairing class C bottom half {:.6}, top half {:.6}, top-half ratios non-increasing: {monotone}",
            fit.bottom.to_f64(),
            fit.top.to_f64()
        ),
    )
}

fn md_end_to_end_one(system: &MdSystem) -> (bool, String) {
    let report = md_report::<Float>(system, &MdConfig::default(), PREC).unwrap();
    let finite = matches!(report.bound, Bound::Finite(_)) && !report.candidates.is_empty();
    // Recompute every rational image independently of the report.
    let target = system.maps[0].target.clone();
    let basis = MWBasis::<Float>::new(target, system.generators.clone(), PREC).unwrap();
    let mut contained = true;
    let mut images = 0;
    for p in &system.curve.points {
        for f in &system.maps {
            let Ok(img) = f.eval(&p.x, &p.y) else { continue };
            images += 1;
            let coords = basis.decompose(&img).unwrap();
            contained &= report.candidates.contains(&coords);
        }
    }
    let check = report.det_check.as_ref();
    let ratios: Vec<f64> = check
        .map(|c| {
            c.samples
                .iter()
                .filter(|s| c.top_tercile.contains(&s.id))
                .map(|s| s.ratio.as_ref().map_or(f64::NAN, Real::to_f64))
                .collect()
        })
        .unwrap_or_default();
    let in_window = !ratios.is_empty() && ratios.iter().all(|r| (0.5..=1.5).contains(r));
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
    (
        finite && contained && in_window,
        format!(
            "{}: {} candidates, {images} images contained: {contained}, top tercile ratios in [{lo:.4}, {hi:.4}]",
            system.label,
            report.candidates.len()
        ),
    )
}

fn manin_demjanenko() -> Outcome {
    let (ok0, d0) = md_end_to_end_one(&md_demos::rank_zero().unwrap());
    let (ok1, d1) = md_end_to_end_one(&md_demos::rank_one(8).unwrap());
    outcome(ok0 && ok1, format!("{d0}; {d1}"))
}

fn demo_suite() -> Vec<Vec<&'static str>> {
    let mut runs: Vec<Vec<&str>> = vec![
        vec!["curve", "37a1"],
        vec!["curve", "8537830"],
        vec!["height", "389a1", "[0,0]", "--local"],
        vec!["height", "8537830", "[17,5]", "--local"],
        vec!["decompose", "389a1", "[1,0]", "[-1,1]"],
        vec!["torsor", "37a1", r#"{"base": [0,0], "t": "3/5"}"#, "--basis", "37a1"],
        vec!["enumerate", "389a1", "1.5", "--n", "2"],
    ];
    for d in ["pairing-class", "tensor-power", "concatenation", "square"] {
        runs.push(vec!["diag", "--demo", d]);
    }
    for d in ["rank0", "rank1", "rank1-single"] {
        runs.push(vec!["md", "--demo", d]);
    }
    runs
}

fn run_suite() -> Vec<(Option<i32>, Vec<u8>)> {
    let mut out = Vec::new();
    for args in demo_suite() {
        for json in [true, false] {
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_heightlab"));
            cmd.args(["--seed", "7"]);
            if json {
                cmd.arg("--json");
            }
            let o = cmd.args(&args).output().expect("binary runs");
            out.push((o.status.code(), o.stdout));
        }
    }
    out
}

fn determinism() -> Outcome {
    let first = run_suite();
    let second = run_suite();
    let all_ok = first.iter().all(|(c, _)| *c == Some(0));
    let same = first == second;
    outcome(all_ok && same, format!("{} invocations, all exit 0: {all_ok}, byte-identical: {same}", first.len()))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("quadraticity", 60, quadraticity),
        ("local decomposition", 120, local_decomposition),
        ("torsor lift independence", 30, torsor_lifts),
        ("parallelogram and Cauchy-Schwarz", 120, parallelogram_and_cauchy_schwarz),
        ("enumeration oracle", 60, enumeration_oracle),
        ("Kummer exponent", 60, kummer),
        ("degree-ratio law", 120, degree_ratio),
        ("Manin-Dem'janenko end to end", 300, manin_demjanenko),
        ("CLI determinism", 600, determinism),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let passed = o.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {} {name}: {} ({}; {:.1} s of {limit} s)",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
