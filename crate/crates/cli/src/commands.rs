//! One function per subcommand, each producing a JSON value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use heightlab::arith::parse_decimal;
use heightlab::corpus;
use heightlab::gm_torsor::{augment_torsor_point, contributing_places, torsor_global_height, torsor_local_height, RigidifiedBundle};
use heightlab::height_machine::{
    additivity_diagnostic, degree_ratio_diagnostic, demos as diag_demos, BundleQuadruple, SourcePoint,
};
use heightlab::heights::{canonical_height_doubling, canonical_height_localsum, local_heights};
use heightlab::json::{
    augmentation_to_json, curve_from_json, curve_system_from_json, curve_to_json, diagnostic_to_json, md_report_to_json,
    md_system_from_json, md_system_to_json, point_from_json, point_to_json, quadruple_from_json, rational_to_json,
    real_to_json, torsor_from_json, torsor_to_json, valuation_vector_to_json,
};
use heightlab::manin::{demos as md_demos, md_report, MdSystem};
use heightlab::mordell_weil::MWBasis;
use heightlab::{ECPoint, Error, Float, Rational, Real, Result, WeierstrassCurve};

use crate::config::Config;
use crate::input::resolve;

/// Multiples `kP` used by the built-in diagnostic demos.
pub const DIAG_DEMO_MULTIPLES: i64 = 12;
/// Largest `n` with `nP` and `nP + T` lifted in the rank-one fitting corpus.
pub const MD_DEMO_MULTIPLES: i64 = 8;

pub const DIAG_DEMOS: [&str; 4] = ["pairing-class", "tensor-power", "concatenation", "square"];
pub const MD_DEMOS: [&str; 3] = ["rank0", "rank1", "rank1-single"];

/// Agreement demanded of independent routes to the same height.
const CHECK_TOLERANCE: f64 = 1e-8;

fn digits(cfg: &Config) -> usize {
    cfg.precision as usize
}

fn real(cfg: &Config, x: &Float) -> Value {
    real_to_json(x, digits(cfg))
}

fn tolerance(cfg: &Config) -> Float {
    Float::from_f64_in(CHECK_TOLERANCE, cfg.prec())
}

fn check(cfg: &Config, a: &Float, b: &Float) -> Value {
    let diff = (a.clone() - b.clone()).abs();
    let ok = diff <= tolerance(cfg);
    json!({"difference": real(cfg, &diff), "tolerance": "1e-8", "ok": ok})
}

pub fn curve(cfg: &Config, arg: &str) -> Result<Value> {
    let e = curve_from_json(&resolve(arg)?)?;
    let m = e.minimal_model()?;
    let torsion = e.torsion_subgroup()?;
    let reduction = m
        .bad_primes
        .iter()
        .map(|p| {
            let r = e.reduction_data(p)?;
            Ok(json!({
                "p": p.to_string(),
                "type": r.kind.label(),
                "v_disc": r.v_disc,
                "v_c4": r.v_c4,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let iso = &m.iso;
    let q = rational_to_json;
    Ok(json!({
        "curve": curve_to_json(&e),
        "b2": q(e.b2()), "b4": q(e.b4()), "b6": q(e.b6()), "b8": q(e.b8()),
        "c4": q(e.c4()), "c6": q(e.c6()),
        "discriminant": q(e.discriminant()),
        "j_invariant": q(e.j_invariant()),
        "minimal_model": {
            "curve": curve_to_json(&m.curve),
            "discriminant": q(m.curve.discriminant()),
            "is_input": m.is_trivial(),
            "change_of_coordinates": {"u": q(&iso.u), "r": q(&iso.r), "s": q(&iso.s), "t": q(&iso.t)},
        },
        "bad_primes": m.bad_primes.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "reduction": reduction,
        "reduction_elsewhere": "good",
        "torsion": {
            "structure": torsion.label(),
            "order": torsion.order(),
            "points": torsion.points.iter().map(point_to_json).collect::<Vec<_>>(),
        },
        "factor_bound": cfg.factor_bound,
    }))
}

pub fn height(cfg: &Config, curve_arg: &str, point_arg: &str, local: bool) -> Result<Value> {
    let e = curve_from_json(&resolve(curve_arg)?)?;
    let p = point_from_json(&resolve(point_arg)?)?;
    e.check_point(&p)?;
    let prec = cfg.prec();
    let torsion = e.is_torsion(&p)?;
    let by_doubling = canonical_height_doubling::<Float>(&e, &p, prec)?.value;
    let by_locals = canonical_height_localsum::<Float>(&e, &p, prec)?.value;
    let mut agreement = check(cfg, &by_doubling, &by_locals);
    agreement["doubling"] = real(cfg, &by_doubling);
    agreement["local_sum"] = real(cfg, &by_locals);
    let mut out = json!({
        "curve": curve_to_json(&e),
        "point": point_to_json(&p),
        "torsion": torsion,
        "hhat": real(cfg, &by_doubling),
        "method_agreement": agreement,
        "precision": cfg.precision,
    });
    if local {
        // Torsion points carry no height, so their table is left empty.
        let table = if torsion { Vec::new() } else { local_heights::<Float>(&e, &p, prec)? };
        let sum = table.iter().fold(Float::from_i64_in(0, prec), |acc, l| acc + l.value.clone());
        out["local"] = Value::Array(table.iter().map(|l| heightlab::json::local_height_to_json(l, digits(cfg))).collect());
        out["local_sum"] = real(cfg, &sum);
        out["sum_check"] = check(cfg, &sum, &by_doubling);
    }
    Ok(out)
}

type Factors = Vec<(WeierstrassCurve, Vec<ECPoint>)>;

/// A corpus label, `{"curve", "generators"}` or `{"curves", "generators"}`.
fn basis_factors(v: &Value) -> Result<Factors> {
    if let Some(label) = v.as_str() {
        let c = corpus::curves()
            .into_iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::Parse(format!("unknown basis label {label:?}")))?;
        return Ok(vec![(c.curve, c.generators)]);
    }
    if let Some(c) = v.get("curve") {
        let gens = v
            .get("generators")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("basis needs a generators array".into()))?;
        return Ok(vec![(curve_from_json(c)?, gens.iter().map(point_from_json).collect::<Result<_>>()?)]);
    }
    heightlab::json::basis_from_json(v)
}

fn basis(cfg: &Config, arg: &str) -> Result<MWBasis<Float>> {
    let factors = basis_factors(&resolve(arg)?)?;
    Ok(MWBasis::<Float>::product(factors, cfg.prec())?.with_denominator_bound(cfg.denominator_bound))
}

fn gram_json(cfg: &Config, b: &MWBasis<Float>) -> Value {
    Value::Array(b.gram().iter().map(|row| Value::Array(row.iter().map(|x| real(cfg, x)).collect())).collect())
}

pub fn decompose(cfg: &Config, basis_arg: &str, points: &[String]) -> Result<Value> {
    let b = basis(cfg, basis_arg)?;
    let pts = points.iter().map(|p| point_from_json(&resolve(p)?)).collect::<Result<Vec<_>>>()?;
    let entry = |label: Value, a: heightlab::mordell_weil::Augmentation| {
        json!({
            "point": label,
            "coords": augmentation_to_json(&a),
            "denominator": a.denominator().to_string(),
            "qf_height": real(cfg, &b.qf_height(&a)),
        })
    };
    let decompositions = if b.blocks().len() == 1 {
        pts.iter().map(|p| Ok(entry(point_to_json(p), b.decompose(p)?))).collect::<Result<Vec<_>>>()?
    } else {
        vec![entry(Value::Array(pts.iter().map(point_to_json).collect()), b.decompose_tuple(&pts)?)]
    };
    Ok(json!({
        "rank": b.rank(),
        "gram": gram_json(cfg, &b),
        "regulator": real(cfg, &b.regulator()),
        "denominator_bound": b.denominator_bound(),
        "decompositions": decompositions,
    }))
}

pub fn torsor(cfg: &Config, curve_arg: &str, torsor_arg: &str, degree: u32, basis_arg: Option<&str>, lifts: usize) -> Result<Value> {
    let e = curve_from_json(&resolve(curve_arg)?)?;
    let pt = torsor_from_json(&resolve(torsor_arg)?)?;
    e.check_point(pt.base())?;
    let prec = cfg.prec();
    let bundle = RigidifiedBundle::new(e.clone(), degree)?;
    let global = torsor_global_height::<Float>(&bundle, &pt, prec)?;
    let mut table = Vec::new();
    let mut sum = Float::from_i64_in(0, prec);
    for v in contributing_places(&bundle, &pt, cfg.factor_bound)? {
        let h = torsor_local_height::<Float>(&bundle, &pt, &v, prec)?;
        sum = sum + h.clone();
        table.push(json!({"place": v.label(), "value": real(cfg, &h)}));
    }
    let half = Float::from_rational_in(&Rational::new(degree.into(), 2.into()), prec);
    let expected = half * canonical_height_localsum::<Float>(&e, pt.base(), prec)?.value;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(lifts);
    let mut spread = Float::from_i64_in(0, prec);
    for _ in 0..lifts {
        let num: i64 = rng.gen_range(1..=10_000) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let den: i64 = rng.gen_range(1..=10_000);
        let kappa = Rational::new(num.into(), den.into());
        let h = torsor_global_height::<Float>(&bundle, &pt.rescale(&kappa)?, prec)?;
        spread = spread.max_of((h.clone() - global.clone()).abs());
        samples.push(json!({"kappa": rational_to_json(&kappa), "height": real(cfg, &h)}));
    }

    let mut out = json!({
        "curve": curve_to_json(&e),
        "degree": degree,
        "torsor_point": torsor_to_json(&pt),
        "global_height": real(cfg, &global),
        "expected": real(cfg, &expected),
        "expected_check": check(cfg, &global, &expected),
        "local": table,
        "local_sum": real(cfg, &sum),
        "sum_check": check(cfg, &sum, &global),
        "seed": cfg.seed,
        "lifts": samples,
        "lift_spread": real(cfg, &spread),
    });
    if let Some(arg) = basis_arg {
        let b = basis(cfg, arg)?;
        let aug = augment_torsor_point(&bundle, &pt, &b, cfg.factor_bound)?;
        out["augmentation"] = json!({
            "base": augmentation_to_json(&aug.base_aug),
            "fiber_class": valuation_vector_to_json(&aug.fiber_class),
        });
    }
    Ok(out)
}

pub fn enumerate(cfg: &Config, basis_arg: &str, bound: &str, n: u32) -> Result<Value> {
    if n == 0 {
        return Err(Error::Input("n must be positive".into()));
    }
    let b = basis(cfg, basis_arg)?;
    let bound_q = parse_decimal(bound)?;
    let bound_f = Float::from_rational_in(&bound_q, cfg.prec());
    let mut found = b.enumerate_bounded(&bound_f, n)?;
    found.sort_by(|x, y| x.coords.cmp(&y.coords));
    Ok(json!({
        "rank": b.rank(),
        "bound": rational_to_json(&bound_q),
        "n": n,
        "count": found.len(),
        "candidates": found.iter().map(|a| json!({"coords": augmentation_to_json(a), "qf_height": real(cfg, &b.qf_height(a))})).collect::<Vec<_>>(),
    }))
}

fn ratio_json(cfg: &Config, name: &str, q0: &BundleQuadruple, q: &BundleQuadruple, d0: i64, d: u32, corpus: &[SourcePoint]) -> Result<Value> {
    let r = degree_ratio_diagnostic::<Float>(q0, q, d0, d, corpus, &cfg.envelope(), cfg.prec())?;
    let mut v = diagnostic_to_json(&r, digits(cfg));
    v["name"] = Value::String(name.into());
    v["degL0"] = json!(d0);
    v["degL"] = json!(d);
    Ok(v)
}

fn additivity_json(
    cfg: &Config,
    name: &str,
    q1: &BundleQuadruple,
    q2: &BundleQuadruple,
    q12: &BundleQuadruple,
    corpus: &[SourcePoint],
) -> Result<Value> {
    let r = additivity_diagnostic::<Float>(q1, q2, q12, corpus, &cfg.envelope(), cfg.prec())?;
    let mut v = diagnostic_to_json(&r, digits(cfg));
    v["name"] = Value::String(name.into());
    Ok(v)
}

pub fn diag_demo(cfg: &Config, name: &str) -> Result<Value> {
    let k = DIAG_DEMO_MULTIPLES;
    match name {
        "pairing-class" | "tensor-power" => {
            let d = if name == "pairing-class" { diag_demos::pairing_class(k)? } else { diag_demos::tensor_power(k)? };
            ratio_json(cfg, d.name, &d.q0, &d.q, d.deg_l0, d.deg_l, &d.corpus)
        }
        "concatenation" | "square" => {
            let d = if name == "square" { diag_demos::square(k)? } else { diag_demos::concatenation(k)? };
            additivity_json(cfg, d.name, &d.q1, &d.q2, &d.q12, &d.corpus)
        }
        _ => Err(Error::Input(format!("unknown diagnostic demo {name:?}; expected one of {}", DIAG_DEMOS.join(", ")))),
    }
}

fn quadruple(v: &Value, key: &str, maps: &[heightlab::height_machine::RationalMap]) -> Result<BundleQuadruple> {
    quadruple_from_json(v.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))?, maps)
}

/// A curve system with `"diagnostic": "degree-ratio"` (`q0`, `q`, `degL0`,
/// `degL`) or `"additivity"` (`q1`, `q2`, `q12`); the corpus is `points`.
pub fn diag_file(cfg: &Config, arg: &str) -> Result<Value> {
    let v = resolve(arg)?;
    let (curve, maps) = curve_system_from_json(&v)?;
    let name = v.get("label").and_then(Value::as_str).unwrap_or("diagnostic");
    let int = |key: &str| v.get(key).and_then(Value::as_i64).ok_or_else(|| Error::Parse(format!("{key} must be an integer")));
    match v.get("diagnostic").and_then(Value::as_str) {
        Some("degree-ratio") => {
            let d = int("degL")?;
            if d <= 0 {
                return Err(Error::Parse("degL must be positive".into()));
            }
            ratio_json(cfg, name, &quadruple(&v, "q0", &maps)?, &quadruple(&v, "q", &maps)?, int("degL0")?, d as u32, &curve.points)
        }
        Some("additivity") => additivity_json(
            cfg,
            name,
            &quadruple(&v, "q1", &maps)?,
            &quadruple(&v, "q2", &maps)?,
            &quadruple(&v, "q12", &maps)?,
            &curve.points,
        ),
        _ => Err(Error::Parse("\"diagnostic\" must be \"degree-ratio\" or \"additivity\"".into())),
    }
}

pub fn md_demo_system(name: &str) -> Result<MdSystem> {
    match name {
        "rank0" => md_demos::rank_zero(),
        "rank1" => md_demos::rank_one(MD_DEMO_MULTIPLES),
        "rank1-single" => md_demos::rank_one_single_map(),
        _ => Err(Error::Input(format!("unknown system demo {name:?}; expected one of {}", MD_DEMOS.join(", ")))),
    }
}

pub fn md_system(arg: &str) -> Result<MdSystem> {
    md_system_from_json(&resolve(arg)?)
}

pub fn md(cfg: &Config, system: &MdSystem, emit_system: bool) -> Result<Value> {
    if emit_system {
        return Ok(md_system_to_json(system));
    }
    let report = md_report::<Float>(system, &cfg.md(), cfg.prec())?;
    let mut v = md_report_to_json(&report, digits(cfg));
    v["precision"] = json!(cfg.precision);
    Ok(v)
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Input(_) | Error::Domain(_) => 2,
        Error::SingularCurve => 3,
        Error::NotOnCurve => 4,
        Error::InvalidBasis(_) => 5,
        _ => 1,
    }
}
