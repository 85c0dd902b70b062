use anyhow::{bail, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::spec::{Format, RunSpec};

pub const JSON_DIGITS: usize = 12;
pub const CSV_DIGITS: usize = 6;

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<R> {
    pub spec: RunSpec,
    pub rows: Vec<R>,
}

/// Rounds to `digits` significant digits; non-finite values pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Formats with `digits` significant digits, plain notation for moderate
/// magnitudes and trailing zeros trimmed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let x = round_sig(x, digits);
    let exponent = x.abs().log10().floor() as i32;
    if (-5..digits as i32).contains(&exponent) {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

fn round_value(v: Value, digits: usize) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_sig(x, digits)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(|x| round_value(x, digits)).collect()),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, x)| (k, round_value(x, digits)))
                .collect(),
        ),
        other => other,
    }
}

pub fn to_json<R: Serialize>(spec: &RunSpec, rows: &[R]) -> Result<String> {
    let doc = serde_json::json!({ "spec": spec, "rows": rows });
    let mut text = serde_json::to_string_pretty(&round_value(doc, JSON_DIGITS))?;
    text.push('\n');
    Ok(text)
}

pub fn from_json<R: DeserializeOwned>(text: &str) -> Result<Document<R>> {
    Ok(serde_json::from_str(text)?)
}

fn cell(v: &Value) -> Result<String> {
    Ok(match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (None, Some(u)) => u.to_string(),
            _ => format_sig(n.as_f64().unwrap_or(f64::NAN), CSV_DIGITS),
        },
        Value::String(s) => s.clone(),
        _ => bail!("nested value cannot be written as a CSV cell"),
    })
}

fn fields(row: &Value) -> Result<&Map<String, Value>> {
    match row {
        Value::Object(o) => Ok(o),
        _ => bail!("CSV rows must be records"),
    }
}

/// Header row from the record's field names, in declaration order.
pub fn csv_header<R: Serialize>(row: &R) -> Result<Vec<String>> {
    Ok(fields(&serde_json::to_value(row)?)?
        .keys()
        .cloned()
        .collect())
}

pub fn to_csv<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for (i, row) in rows.iter().enumerate() {
        let value = serde_json::to_value(row)?;
        let record = fields(&value)?;
        if i == 0 {
            writer.write_record(record.keys())?;
        }
        let cells = record.values().map(cell).collect::<Result<Vec<_>>>()?;
        writer.write_record(&cells)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

pub fn render<R: Serialize>(spec: &RunSpec, rows: &[R]) -> Result<String> {
    match spec.format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(spec, rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.0 / 3.0, 6), "0.333333");
        assert_eq!(format_sig(0.0625, 6), "0.0625");
        assert_eq!(format_sig(1.0, 6), "1");
        assert_eq!(format_sig(123456.7, 6), "123457");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e6");
        assert_eq!(format_sig(-2.5e-7, 6), "-2.50000e-7");
        assert_eq!(round_sig(0.123_456_789_012_345, 12), 0.123_456_789_012);
        assert_eq!(round_sig(0.0, 12), 0.0);
    }

    #[derive(Serialize)]
    struct Row {
        b: f64,
        a: Option<u32>,
        name: &'static str,
    }

    #[test]
    fn csv_keeps_field_order() {
        let text = to_csv(&[
            Row {
                b: 0.5,
                a: None,
                name: "x",
            },
            Row {
                b: 2.0 / 3.0,
                a: Some(3),
                name: "y",
            },
        ])
        .unwrap();
        assert_eq!(text, "b,a,name\n0.5,,x\n0.666667,3,y\n");
    }
}
