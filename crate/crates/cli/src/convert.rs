//! Flat CSV tables from JSON reports. One row per check; numbers use the
//! same 17-significant-digit form as the JSON writer.

use anyhow::{bail, Result};
use serde_json::Value;

use crate::json::fmt_f64;

pub const HEADER: [&str; 12] = [
    "suite",
    "case",
    "check",
    "l",
    "alpha",
    "numerator",
    "denominator",
    "ratio",
    "value",
    "margin",
    "tolerance",
    "pass",
];

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::Number(n)) if n.is_f64() => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Bool(b)) => b.to_string(),
        Some(other) => other.to_string(),
    }
}

fn is_report(v: &Value) -> bool {
    v.get("check").is_some_and(Value::is_string)
}

fn row(suite: &str, case: &str, r: &Value) -> Vec<String> {
    let witness = r.get("witness");
    let step = r
        .get("step")
        .or_else(|| witness.and_then(|w| w.get("step")))
        .or_else(|| witness.and_then(|w| w.get("l")));
    let alpha = r.get("alpha").or_else(|| witness.and_then(|w| w.get("alpha")));
    vec![
        suite.to_string(),
        case.to_string(),
        cell(r.get("check")),
        cell(step),
        cell(alpha),
        cell(r.get("numerator")),
        cell(r.get("denominator")),
        cell(r.get("ratio")),
        cell(r.get("value")),
        cell(r.get("margin")),
        cell(r.get("tolerance")),
        cell(r.get("passed")),
    ]
}

fn suite_rows(suite: &Value, out: &mut Vec<Vec<String>>) -> Result<()> {
    let name = suite.get("suite").and_then(Value::as_str).unwrap_or_default();
    let Some(cases) = suite.get("cases").and_then(Value::as_array) else {
        bail!("malformed report: suite {name:?} has no \"cases\" array");
    };
    for case in cases {
        let case_name = case.get("case").and_then(Value::as_str).unwrap_or_default();
        let Some(checks) = case.get("checks").and_then(Value::as_array) else {
            bail!("malformed report: case {case_name:?} has no \"checks\" array");
        };
        for check in checks {
            if !is_report(check) {
                bail!("malformed report: check without a name in case {case_name:?}");
            }
            out.push(row(name, case_name, check));
        }
    }
    Ok(())
}

/// Data rows for any report the CLI writes: a corpus report, a suite
/// report, a single check or ratio report, or an array of those.
pub fn rows(report: &Value) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    match report {
        Value::Object(m) if m.is_empty() => {}
        Value::Array(items) => {
            for item in items {
                out.extend(rows(item)?);
            }
        }
        v if v.get("suites").is_some() => {
            let Some(suites) = v["suites"].as_array() else {
                bail!("malformed report: \"suites\" is not an array");
            };
            for suite in suites {
                suite_rows(suite, &mut out)?;
            }
        }
        v if v.get("cases").is_some() => suite_rows(v, &mut out)?,
        v if is_report(v) => out.push(row("", "", v)),
        _ => bail!("malformed report: expected a check, ratio, suite or corpus report"),
    }
    Ok(out)
}

pub fn to_csv(report: &Value) -> Result<String> {
    let data = rows(report)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in data {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn single_check_is_one_row() {
        let csv = to_csv(&json!({"check": "ptolemy", "passed": true, "margin": 0.25, "tolerance": 1e-9})).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], ",,ptolemy,,,,,,,2.5000000000000000e-1,1.0000000000000001e-9,true");
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(to_csv(&json!({})).unwrap().lines().count(), 1);
        assert_eq!(to_csv(&json!([])).unwrap().lines().count(), 1);
    }

    #[test]
    fn ratio_report_takes_step_from_witness() {
        let r = json!({"check": "markov_power", "numerator": 1.0, "denominator": 3.0,
                       "ratio": 0.3, "sqrt_ratio": 0.5, "witness": {"l": 3}});
        let data = rows(&r).unwrap();
        assert_eq!(data[0][3], "3");
        assert_eq!(data[0][11], "");
    }

    #[test]
    fn malformed_reports_are_rejected() {
        assert!(to_csv(&json!({"foo": 1})).is_err());
        assert!(to_csv(&json!({"suites": [{"suite": "x"}]})).is_err());
        assert!(to_csv(&json!(3)).is_err());
    }
}
