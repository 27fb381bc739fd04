//! JSON encoding of spaces, chains and reports.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64` exactly. Non-finite values are written as the strings `"inf"`,
//! `"-inf"` and `"nan"`; the `p` of the max norm is `"inf"`.

use std::io;

use anyhow::{anyhow, bail, Context, Result};
use curvtype_core::report::{CheckReport, RatioReport, Witness};
use curvtype_core::verify::{CaseResult, CorpusReport, SuiteReport};
use curvtype_core::{FiniteMetricSpace, GeometricModel, Matrix, ModelKind, ReversibleChain};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

/// Text form of a float shared by the JSON and CSV writers.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Pretty printer whose floats carry 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-digit floats and a trailing newline.
pub fn to_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing a Value into memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(fmt_f64(x)), Value::Number)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

fn rows(m: &Matrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| nums(&m.row(i).iter().copied().collect::<Vec<_>>())).collect())
}

/// Inserts `key` unless `value` is null.
fn put(map: &mut Map<String, Value>, key: &str, value: Value) {
    if !value.is_null() {
        map.insert(key.into(), value);
    }
}

// ---- reading ---------------------------------------------------------------

pub fn parse(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).with_context(|| format!("{what} is not valid JSON"))
}

pub fn as_f64(v: &Value, what: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| anyhow!("{what}: not a float")),
        Value::String(s) => match s.as_str() {
            "inf" | "Infinity" => Ok(f64::INFINITY),
            "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
            "nan" | "NaN" => Ok(f64::NAN),
            _ => bail!("{what}: expected a number, found {s:?}"),
        },
        _ => bail!("{what}: expected a number"),
    }
}

pub fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| anyhow!("{what}: expected a nonnegative integer"))
}

pub fn as_vec(v: &Value, what: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| anyhow!("{what}: expected an array"))?
        .iter()
        .enumerate()
        .map(|(k, x)| as_f64(x, &format!("{what}[{k}]")))
        .collect()
}

pub fn as_rows(v: &Value, what: &str) -> Result<Vec<Vec<f64>>> {
    v.as_array()
        .ok_or_else(|| anyhow!("{what}: expected an array of rows"))?
        .iter()
        .enumerate()
        .map(|(k, row)| as_vec(row, &format!("{what}[{k}]")))
        .collect()
}

fn square(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 {
        bail!("{what}: empty matrix");
    }
    if let Some(k) = rows.iter().position(|r| r.len() != n) {
        bail!("{what}: row {k} has {} entries, expected {n}", rows[k].len());
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

// ---- spaces -----------------------------------------------------------------

pub fn space_to_value(space: &FiniteMetricSpace) -> Value {
    let mut map = Map::new();
    map.insert("n".into(), json!(space.len()));
    map.insert("dist".into(), Value::Array(space.rows().iter().map(|r| nums(r)).collect()));
    if let Some(labels) = space.labels() {
        map.insert("labels".into(), json!(labels));
    }
    if let Some(model) = space.model() {
        let mut m = Map::new();
        match model.kind() {
            ModelKind::Euclidean => {
                m.insert("kind".into(), json!("euclidean"));
            }
            ModelKind::Lp(p) => {
                m.insert("kind".into(), json!("lp"));
                m.insert("p".into(), num(p));
            }
            ModelKind::Sphere { radius } => {
                m.insert("kind".into(), json!("sphere"));
                m.insert("radius".into(), num(radius));
            }
        }
        m.insert("coords".into(), Value::Array(model.coords().iter().map(|c| nums(c)).collect()));
        map.insert("model".into(), Value::Object(m));
    }
    Value::Object(map)
}

/// Reads a space written by [`space_to_value`]. Either `dist` or `model` must
/// be present; when both are, the model must reproduce the distances.
pub fn space_from_value(v: &Value, tol_rel: f64) -> Result<FiniteMetricSpace> {
    let model = match v.get("model") {
        None | Some(Value::Null) => None,
        Some(m) => {
            let kind = match m.get("kind").and_then(Value::as_str) {
                Some("euclidean") => ModelKind::Euclidean,
                Some("lp") => ModelKind::Lp(as_f64(m.get("p").ok_or_else(|| anyhow!("model.p missing"))?, "model.p")?),
                Some("sphere") => ModelKind::Sphere {
                    radius: m.get("radius").map_or(Ok(1.0), |r| as_f64(r, "model.radius"))?,
                },
                other => bail!("model.kind: expected euclidean, lp or sphere, found {other:?}"),
            };
            let coords = as_rows(m.get("coords").ok_or_else(|| anyhow!("model.coords missing"))?, "model.coords")?;
            Some(GeometricModel::new(kind, coords)?)
        }
    };
    let mut space = match (v.get("dist"), model) {
        (Some(d), model) => {
            let rows = as_rows(d, "dist")?;
            let n = rows.len();
            if let Some(declared) = v.get("n") {
                let declared = as_usize(declared, "n")?;
                if declared != n {
                    bail!("n = {declared} but dist has {n} rows");
                }
            }
            if let Some(k) = rows.iter().position(|r| r.len() != n) {
                bail!("dist: row {k} has {} entries, expected {n}", rows[k].len());
            }
            let space = FiniteMetricSpace::from_flat(n, rows.concat(), tol_rel)?;
            match model {
                Some(m) => space.with_model(m, tol_rel)?,
                None => space,
            }
        }
        (None, Some(m)) => FiniteMetricSpace::from_model(m)?,
        (None, None) => bail!("a space needs \"dist\" or \"model\""),
    };
    if let Some(labels) = v.get("labels").filter(|l| !l.is_null()) {
        let labels: Vec<String> = serde_json::from_value(labels.clone()).context("labels: expected strings")?;
        space = space.with_labels(labels)?;
    }
    Ok(space)
}

// ---- chains -----------------------------------------------------------------

pub fn chain_to_value(chain: &ReversibleChain) -> Value {
    json!({
        "n": chain.len(),
        "pi": nums(chain.pi()),
        "A": rows(chain.transition()),
    })
}

/// `{"weights": W}` (symmetric nonnegative) or `{"pi": .., "A": ..}`.
pub fn chain_from_value(v: &Value, tol_abs: f64) -> Result<ReversibleChain> {
    if let Some(w) = v.get("weights") {
        let w = square(&as_rows(w, "weights")?, "weights")?;
        return Ok(ReversibleChain::from_weights(&w)?);
    }
    let pi = as_vec(v.get("pi").ok_or_else(|| anyhow!("chain needs \"weights\" or \"pi\" and \"A\""))?, "pi")?;
    let a = square(&as_rows(v.get("A").ok_or_else(|| anyhow!("chain needs \"A\""))?, "A")?, "A")?;
    Ok(ReversibleChain::new(pi, a, tol_abs)?)
}

/// `{"weights": W}` as a symmetric matrix.
pub fn weights_from_value(v: &Value) -> Result<Matrix> {
    let w = v.get("weights").unwrap_or(v);
    square(&as_rows(w, "weights")?, "weights")
}

/// `{"vectors": [[..], ..]}` or a bare array of vectors.
pub fn vectors_from_value(v: &Value) -> Result<Vec<Vec<f64>>> {
    as_rows(v.get("vectors").unwrap_or(v), "vectors")
}

// ---- reports ----------------------------------------------------------------

pub fn witness_to_value(w: &Witness) -> Value {
    match w {
        Witness::None => Value::Null,
        Witness::Indices(idx) => json!({ "indices": idx }),
        Witness::Configuration { indices, weights, y } => json!({
            "indices": indices,
            "weights": nums(weights),
            "y": y,
        }),
        Witness::Labeling { dim, assign } => json!({ "dim": dim, "assign": assign }),
        Witness::Chain { n, weights, step } => json!({
            "n": n,
            "weights": Value::Array(weights.chunks(*n).map(nums).collect()),
            "step": step,
        }),
        Witness::Step { l, alpha } => {
            let mut m = Map::new();
            m.insert("l".into(), json!(l));
            put(&mut m, "alpha", opt_num(*alpha));
            Value::Object(m)
        }
    }
}

pub fn check_to_value(r: &CheckReport) -> Value {
    let mut m = Map::new();
    m.insert("check".into(), json!(r.check));
    m.insert("passed".into(), json!(r.passed));
    m.insert("margin".into(), num(r.margin));
    m.insert("tolerance".into(), num(r.tolerance));
    put(&mut m, "value", opt_num(r.value));
    put(&mut m, "numerator", opt_num(r.numerator));
    put(&mut m, "denominator", opt_num(r.denominator));
    put(&mut m, "ratio", opt_num(r.ratio));
    put(&mut m, "step", r.step.map_or(Value::Null, |s| json!(s)));
    put(&mut m, "alpha", opt_num(r.alpha));
    put(&mut m, "witness", witness_to_value(&r.witness));
    put(&mut m, "detail", r.detail.as_ref().map_or(Value::Null, |d| json!(d)));
    put(&mut m, "seed", r.seed.map_or(Value::Null, |s| json!(s)));
    put(&mut m, "trials", r.trials.map_or(Value::Null, |t| json!(t)));
    Value::Object(m)
}

pub fn ratio_to_value(r: &RatioReport) -> Value {
    let mut m = Map::new();
    m.insert("check".into(), json!(r.check));
    m.insert("numerator".into(), num(r.numerator));
    m.insert("denominator".into(), num(r.denominator));
    m.insert("ratio".into(), num(r.ratio));
    m.insert("sqrt_ratio".into(), num(r.sqrt_ratio));
    put(&mut m, "witness", witness_to_value(&r.witness));
    put(&mut m, "seed", r.seed.map_or(Value::Null, |s| json!(s)));
    put(&mut m, "budget", r.budget.map_or(Value::Null, |b| json!(b)));
    Value::Object(m)
}

fn case_to_value(c: &CaseResult) -> Value {
    json!({
        "case": c.case,
        "provenance": c.provenance.name(),
        "hypothesis": if c.hypothesis_verified { "verified" } else { "hypothesis-unverified" },
        "passed": c.passed,
        "checks": c.checks.iter().map(check_to_value).collect::<Vec<_>>(),
    })
}

pub fn suite_to_value(s: &SuiteReport) -> Value {
    json!({
        "suite": s.suite,
        "corpus": s.corpus,
        "passed": s.passed,
        "worst_margin": opt_num(s.worst_margin),
        "worst_case": s.worst_case,
        "worst_ratio": opt_num(s.worst_ratio),
        "cases": s.cases.iter().map(case_to_value).collect::<Vec<_>>(),
    })
}

pub fn corpus_to_value(r: &CorpusReport, config: Value) -> Value {
    json!({
        "corpus": r.corpus,
        "passed": r.passed,
        "config": config,
        "suites": r.suites.iter().map(suite_to_value).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use curvtype_core::metric::{lp_point_space, sphere_sample, tripod};

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(to_string(&json!({"x": 0.5})), "{\n  \"x\": 5.0000000000000000e-1\n}\n");
    }

    #[test]
    fn spaces_round_trip() {
        let spaces = [
            sphere_sample(6, 3, 2.0).unwrap(),
            tripod(),
            lp_point_space(vec![vec![0.0, 1.0], vec![2.0, -1.0]], f64::INFINITY).unwrap(),
        ];
        for space in spaces {
            let text = to_string(&space_to_value(&space));
            let back = space_from_value(&parse(&text, "space").unwrap(), 1e-9).unwrap();
            assert_eq!(back, space);
        }
    }

    #[test]
    fn chains_round_trip() {
        let w = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.5, 0.0, 2.0, 0.0, 0.0]);
        let chain = ReversibleChain::from_weights(&w).unwrap();
        let text = to_string(&chain_to_value(&chain));
        let back = chain_from_value(&parse(&text, "chain").unwrap(), 1e-12).unwrap();
        assert_eq!(back, chain);
        let from_w = chain_from_value(&json!({"weights": [[0.0, 1.0, 2.0], [1.0, 0.5, 0.0], [2.0, 0.0, 0.0]]}), 1e-12).unwrap();
        assert_eq!(from_w, chain);
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(space_from_value(&json!({"dist": [[0.0, 1.0], [2.0, 0.0]]}), 1e-9).is_err());
        assert!(space_from_value(&json!({"n": 3, "dist": [[0.0]]}), 1e-9).is_err());
        assert!(space_from_value(&json!({}), 1e-9).is_err());
        assert!(chain_from_value(&json!({"weights": [[0.0, 1.0], [2.0, 0.0]]}), 1e-12).is_err());
    }
}
