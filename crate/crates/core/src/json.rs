//! JSON encodings.
//!
//! Rationals are `"p/q"` strings (integers as `"p"`), points are `"inf"` or
//! `{"x": .., "y": ..}`, curves are `{"a1": .., "a2": .., "a3": .., "a4": ..,
//! "a6": ..}` or a label of the built-in corpus. Reals are fixed-point
//! decimal strings so output is byte-stable.

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::arith::{format_rational, parse_rational, Place, ValuationVector};
use crate::corpus;
use crate::elliptic::{ECPoint, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::gm_torsor::TorsorPoint;
use crate::height_machine::{
    parse_equation, BundleQuadruple, DiagnosticReport, PlaneCurve, QuadrupleTerm, RatFunc, RationalMap, SourcePoint,
};
use crate::heights::LocalHeightValue;
use crate::manin::quadratic::QuadElt;
use crate::manin::{Bound, DegreePairing, DetReport, FieldPoint, MdReport, MdSystem};
use crate::mordell_weil::Augmentation;
use crate::scalar::Real;
use crate::Rational;

/// Parses JSON text, reporting the line and column of syntax errors.
pub fn parse_text(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("invalid JSON at line {} column {}: {e}", e.line(), e.column())))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::Parse(format!("{what} must be a string")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

fn as_u64(v: &Value, what: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| Error::Parse(format!("{what} must be a nonnegative integer")))
}

fn as_i64(v: &Value, what: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::Parse(format!("{what} must be an integer")))
}

pub fn rational_to_json(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

/// Accepts `"p/q"`, decimal strings and JSON integers.
pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap().into())),
        _ => Err(Error::Parse(format!("expected a rational, got {v}"))),
    }
}

pub fn point_to_json(p: &ECPoint) -> Value {
    match p.coords() {
        None => Value::String("inf".into()),
        Some((x, y)) => json!({"x": rational_to_json(x), "y": rational_to_json(y)}),
    }
}

pub fn point_from_json(v: &Value) -> Result<ECPoint> {
    if v.as_str() == Some("inf") {
        return Ok(ECPoint::Infinity);
    }
    if let Some(pair) = v.as_array() {
        if pair.len() == 2 {
            return Ok(ECPoint::affine(rational_from_json(&pair[0])?, rational_from_json(&pair[1])?));
        }
    }
    Ok(ECPoint::affine(rational_from_json(field(v, "x")?)?, rational_from_json(field(v, "y")?)?))
}

pub fn curve_to_json(e: &WeierstrassCurve) -> Value {
    let [a1, a2, a3, a4, a6] = e.coeffs();
    json!({
        "a1": rational_to_json(a1), "a2": rational_to_json(a2), "a3": rational_to_json(a3),
        "a4": rational_to_json(a4), "a6": rational_to_json(a6),
    })
}

/// A curve object, an `[a1, a2, a3, a4, a6]` array, or a corpus label.
pub fn curve_from_json(v: &Value) -> Result<WeierstrassCurve> {
    if let Some(label) = v.as_str() {
        return corpus::curves()
            .into_iter()
            .find(|c| c.label == label)
            .map(|c| c.curve)
            .ok_or_else(|| Error::Parse(format!("unknown curve label {label:?}")));
    }
    if !v.is_object() && !v.is_array() {
        return Err(Error::Parse(format!("expected a curve, got {v}")));
    }
    let a: Vec<Rational> = if let Some(arr) = v.as_array() {
        if arr.len() != 5 {
            return Err(Error::Parse("curve array must have 5 entries".into()));
        }
        arr.iter().map(rational_from_json).collect::<Result<_>>()?
    } else {
        ["a1", "a2", "a3", "a4", "a6"]
            .iter()
            .map(|k| v.get(*k).map_or(Ok(Rational::from_integer(0.into())), rational_from_json))
            .collect::<Result<_>>()?
    };
    let [a1, a2, a3, a4, a6]: [Rational; 5] = a.try_into().expect("five coefficients");
    WeierstrassCurve::new(a1, a2, a3, a4, a6)
}

pub fn valuation_vector_to_json(v: &ValuationVector) -> Value {
    Value::Object(v.entries().map(|(p, e)| (p.to_string(), rational_to_json(e))).collect())
}

pub fn valuation_vector_from_json(v: &Value) -> Result<ValuationVector> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("valuation vector must be an object".into()))?;
    let entries = obj
        .iter()
        .map(|(p, e)| {
            let p = p.parse().map_err(|_| Error::Parse(format!("bad prime {p:?}")))?;
            Ok((p, rational_from_json(e)?))
        })
        .collect::<Result<Vec<_>>>()?;
    ValuationVector::from_entries(entries)
}

pub fn real_to_json<S: Real>(x: &S, digits: usize) -> Value {
    Value::String(x.to_decimal(digits))
}

pub fn local_height_to_json<S: Real>(l: &LocalHeightValue<S>, digits: usize) -> Value {
    json!({
        "place": l.place.label(),
        "value": real_to_json(&l.value, digits),
        "exact_part": l.exact_part.as_ref().map_or(Value::Null, |q| Value::String(format!("{} log {}", format_rational(q), l.place.label()))),
    })
}

pub fn place_from_json(v: &Value) -> Result<Place> {
    Place::parse(as_str(v, "place")?)
}

pub fn torsor_to_json(t: &TorsorPoint) -> Value {
    json!({"base": point_to_json(t.base()), "t": rational_to_json(t.fiber())})
}

pub fn torsor_from_json(v: &Value) -> Result<TorsorPoint> {
    TorsorPoint::new(point_from_json(field(v, "base")?)?, rational_from_json(field(v, "t")?)?)
}

/// `{"curves": [...], "generators": [[...], ...]}` as factors of a product.
pub fn basis_from_json(v: &Value) -> Result<Vec<(WeierstrassCurve, Vec<ECPoint>)>> {
    let curves = as_array(field(v, "curves")?, "curves")?;
    let gens = as_array(field(v, "generators")?, "generators")?;
    if curves.len() != gens.len() {
        return Err(Error::Parse("curves and generators differ in length".into()));
    }
    curves
        .iter()
        .zip(gens)
        .map(|(c, g)| Ok((curve_from_json(c)?, as_array(g, "generator list")?.iter().map(point_from_json).collect::<Result<_>>()?)))
        .collect()
}

pub fn basis_to_json(factors: &[(WeierstrassCurve, Vec<ECPoint>)]) -> Value {
    json!({
        "curves": factors.iter().map(|(c, _)| curve_to_json(c)).collect::<Vec<_>>(),
        "generators": factors.iter().map(|(_, g)| g.iter().map(point_to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn augmentation_to_json(a: &Augmentation) -> Value {
    Value::Array(a.coords.iter().map(rational_to_json).collect())
}

fn source_point_from_json(v: &Value, i: usize) -> Result<SourcePoint> {
    let id = v.get("id").and_then(Value::as_str).map_or_else(|| format!("P{i}"), str::to_string);
    Ok(SourcePoint::new(id, rational_from_json(field(v, "x")?)?, rational_from_json(field(v, "y")?)?))
}

fn source_point_to_json(p: &SourcePoint) -> Value {
    json!({"id": p.id, "x": rational_to_json(&p.x), "y": rational_to_json(&p.y)})
}

fn map_from_json(v: &Value) -> Result<RationalMap> {
    let u = RatFunc::parse(as_str(field(v, "u")?, "u")?)?;
    let w = RatFunc::parse(as_str(field(v, "v")?, "v")?)?;
    let target = curve_from_json(field(v, "target")?)?;
    let degree = as_u64(field(v, "degree")?, "degree")?;
    let f = RationalMap::new(u, w, target, degree as u32)?;
    match v.get("translation") {
        Some(t) => f.translated(&point_from_json(t)?),
        None => Ok(f),
    }
}

fn map_to_json(f: &RationalMap) -> Value {
    let mut m = json!({
        "u": f.u.to_string(), "v": f.v.to_string(), "target": curve_to_json(&f.target), "degree": f.declared_degree,
    });
    if !f.translation.is_infinity() {
        m["translation"] = point_to_json(&f.translation);
    }
    m
}

/// `{"curve": {"F": ..}, "points": [..], "maps": [..]}`.
pub fn curve_system_from_json(v: &Value) -> Result<(PlaneCurve, Vec<RationalMap>)> {
    let c = field(v, "curve")?;
    let equation = parse_equation(as_str(field(c, "F")?, "F")?)?;
    let label = c.get("label").and_then(Value::as_str).unwrap_or("X").to_string();
    let points = match v.get("points") {
        Some(p) => as_array(p, "points")?.iter().enumerate().map(|(i, p)| source_point_from_json(p, i)).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let curve = PlaneCurve::new(label, equation, points)?;
    let maps = match v.get("maps") {
        Some(m) => as_array(m, "maps")?.iter().map(map_from_json).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    Ok((curve, maps))
}

pub fn curve_system_to_json(curve: &PlaneCurve, maps: &[RationalMap]) -> Value {
    json!({
        "curve": {"F": format!("{}", curve.equation), "label": curve.label},
        "points": curve.points.iter().map(source_point_to_json).collect::<Vec<_>>(),
        "maps": maps.iter().map(map_to_json).collect::<Vec<_>>(),
    })
}

/// `{"terms": [[map index, weight, degree], ...], "m": m}`.
pub fn quadruple_from_json(v: &Value, maps: &[RationalMap]) -> Result<BundleQuadruple> {
    let terms = as_array(field(v, "terms")?, "terms")?
        .iter()
        .map(|t| {
            let t = as_array(t, "term")?;
            if t.len() != 3 {
                return Err(Error::Parse("a term is [map, weight, degree]".into()));
            }
            let i = as_u64(&t[0], "map index")? as usize;
            let map = maps.get(i).ok_or_else(|| Error::Parse(format!("no map {i}")))?.clone();
            Ok(QuadrupleTerm { map, weight: as_i64(&t[1], "weight")?, degree: as_u64(&t[2], "degree")? as u32 })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = v.get("m").map_or(Ok(1), |m| as_u64(m, "m"))?;
    BundleQuadruple::new(terms, m as u32)
}

fn quad_elt_from_json(v: &Value, d: &BigInt) -> Result<QuadElt> {
    if let Some(pair) = v.as_array() {
        if pair.len() == 2 {
            return Ok(QuadElt::new(rational_from_json(&pair[0])?, rational_from_json(&pair[1])?, d));
        }
        return Err(Error::Parse("a field element is [a, b] for a + b sqrt(d)".into()));
    }
    Ok(QuadElt::rational(rational_from_json(v)?, d))
}

fn quad_elt_to_json(q: &QuadElt) -> Value {
    if q.is_rational() {
        rational_to_json(&q.a)
    } else {
        json!([rational_to_json(&q.a), rational_to_json(&q.b)])
    }
}

fn field_point_from_json(v: &Value, i: usize) -> Result<FieldPoint> {
    let id = v.get("id").and_then(Value::as_str).map_or_else(|| format!("Q{i}"), str::to_string);
    match v.get("d") {
        None => Ok(FieldPoint::rational(id, rational_from_json(field(v, "x")?)?, rational_from_json(field(v, "y")?)?)),
        Some(d) => {
            let d: BigInt = match d {
                Value::String(s) => s.parse().map_err(|_| Error::Parse(format!("bad radicand {s:?}")))?,
                _ => as_i64(d, "d")?.into(),
            };
            FieldPoint::quadratic(id, d.clone(), quad_elt_from_json(field(v, "x")?, &d)?, quad_elt_from_json(field(v, "y")?, &d)?)
        }
    }
}

fn field_point_to_json(p: &FieldPoint) -> Value {
    let mut o = json!({"id": p.id, "x": quad_elt_to_json(&p.x), "y": quad_elt_to_json(&p.y)});
    if let Some(d) = &p.d {
        o["d"] = Value::String(d.to_string());
    }
    o
}

/// A curve system plus `"generators"`, `"pairing"` (`{"matrix", "degL"}` or
/// `{"primes"}` to estimate it), `"corpus"` and `"n"`.
pub fn md_system_from_json(v: &Value) -> Result<MdSystem> {
    let (curve, maps) = curve_system_from_json(v)?;
    let generators = match v.get("generators") {
        Some(g) => as_array(g, "generators")?.iter().map(point_from_json).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let p = field(v, "pairing")?;
    let pairing = if let Some(primes) = p.get("primes") {
        let primes = as_array(primes, "primes")?.iter().map(|x| as_u64(x, "prime")).collect::<Result<Vec<_>>>()?;
        DegreePairing::estimate(&curve, &maps, &primes)?
    } else {
        let matrix = as_array(field(p, "matrix")?, "matrix")?
            .iter()
            .map(|row| as_array(row, "matrix row")?.iter().map(|x| as_i64(x, "entry")).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        DegreePairing::new(matrix, as_u64(field(p, "degL")?, "degL")? as u32)?
    };
    let corpus = match v.get("corpus") {
        Some(c) => as_array(c, "corpus")?.iter().enumerate().map(|(i, p)| field_point_from_json(p, i)).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let scaling = v.get("n").map_or(Ok(1), |n| as_u64(n, "n"))? as u32;
    if scaling == 0 {
        return Err(Error::Parse("n must be positive".into()));
    }
    let label = v.get("label").and_then(Value::as_str).unwrap_or("system").to_string();
    Ok(MdSystem { label, curve, maps, generators, pairing, corpus, scaling })
}

pub fn md_system_to_json(s: &MdSystem) -> Value {
    let mut v = curve_system_to_json(&s.curve, &s.maps);
    v["label"] = Value::String(s.label.clone());
    v["generators"] = Value::Array(s.generators.iter().map(point_to_json).collect());
    v["pairing"] = json!({"matrix": s.pairing.matrix(), "degL": s.pairing.deg_l()});
    v["corpus"] = Value::Array(s.corpus.iter().map(field_point_to_json).collect());
    v["n"] = json!(s.scaling);
    v
}

pub fn diagnostic_to_json<S: Real>(r: &DiagnosticReport<S>, digits: usize) -> Value {
    let samples: Vec<Value> = r
        .samples
        .iter()
        .map(|s| {
            let mut o = Map::new();
            o.insert("id".into(), Value::String(s.id.clone()));
            for (c, v) in r.columns.iter().zip(&s.values) {
                o.insert((*c).into(), real_to_json(v, digits));
            }
            Value::Object(o)
        })
        .collect();
    let mut v = json!({
        "kind": r.kind,
        "samples": samples,
        "spread": real_to_json(&r.spread, digits),
        "fitted_constants": [real_to_json(&r.fitted.0, digits), real_to_json(&r.fitted.1, digits)],
        "threshold": r.threshold,
        "verdict": if r.passed { "pass" } else { "fail" },
    });
    if let Some(f) = &r.fit {
        v["fit"] = json!({
            "all": real_to_json(&f.all, digits),
            "bottom_half": real_to_json(&f.bottom, digits),
            "top_half": real_to_json(&f.top, digits),
            "growth": format!("{:.6}", f.growth),
        });
    }
    v
}

pub fn det_report_to_json<S: Real>(r: &DetReport<S>, digits: usize) -> Value {
    json!({
        "cutoff": real_to_json(&r.cutoff, digits),
        "leading": rational_to_json(&r.leading),
        "C0": real_to_json(&r.c0, digits),
        "C1": real_to_json(&r.c1, digits),
        "samples": r.samples.iter().map(|s| json!({
            "id": s.id,
            "h_L": real_to_json(&s.h_l, digits),
            "det": if s.exact_zero { Value::String("0".into()) } else { real_to_json(&s.det, digits) },
            "residual": real_to_json(&s.residual, digits),
            "ratio": s.ratio.as_ref().map_or(Value::Null, |q| real_to_json(q, digits)),
        })).collect::<Vec<_>>(),
        "skipped": r.skipped.iter().map(|(id, why)| json!({"id": id, "reason": why})).collect::<Vec<_>>(),
        "top_tercile": r.top_tercile,
        "verdict": if r.passed { "pass" } else { "fail" },
    })
}

pub fn md_report_to_json<S: Real>(r: &MdReport<S>, digits: usize) -> Value {
    json!({
        "label": r.label,
        "criterion_ok": r.criterion_ok,
        "rank_A": r.rank_a,
        "r": r.r,
        "det_P": rational_to_json(&r.det_pairing),
        "degL": r.deg_l,
        "fitted_constants": r.det_check.as_ref().map_or(Value::Null, |c| json!({"C0": real_to_json(&c.c0, digits), "C1": real_to_json(&c.c1, digits)})),
        "bound_B": match &r.bound {
            Bound::Finite(b) => json!({"value": real_to_json(b, digits), "status": "empirical"}),
            Bound::NotDerivable(why) => json!({"value": "not derivable", "reason": why}),
        },
        "image_bound": r.image_bound.as_ref().map_or(Value::Null, |b| real_to_json(b, digits)),
        "candidates": r.candidates.iter().map(augmentation_to_json).collect::<Vec<_>>(),
        "rational_images": r.rational_images.iter().map(|c| json!({
            "id": c.id,
            "coords": c.coords.iter().map(augmentation_to_json).collect::<Vec<_>>(),
            "contained": c.contained,
            "rank": c.rank,
        })).collect::<Vec<_>>(),
        "sound": r.sound,
        "samples_checked": r.det_check.as_ref().map_or(Value::Null, |c| det_report_to_json(c, digits)),
        "errors": r.errors,
        "scope": "candidates bound the lattice images of rational points; locally geometric augmentations beyond these are not enumerated",
    })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
